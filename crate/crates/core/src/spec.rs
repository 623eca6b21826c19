//! The structured semantic specification and its mutation operations.
//!
//! A specification `z = (entities, constraints, unknowns)` is the shared
//! interface of the whole lifecycle: the decomposer produces it, the
//! synthesizer renders it, the verifier reports against its item set, and
//! repair directives are written back into it. Every mutation yields a new
//! snapshot with a strictly larger revision so iteration traces can store
//! exact per-step specs.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::skills::RepairAction;

/// Opaque identifier for entities, constraints, unknowns and evidence.
pub type ItemId = String;

/// A target entity that must be instantiated in the artifact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntitySpec {
    pub id: ItemId,
    /// Short noun phrase, non-empty.
    pub name: String,
    #[serde(default)]
    pub description: String,
    /// Reference-image identifiers, possibly empty.
    #[serde(default)]
    pub reference_ids: Vec<String>,
}

/// The three constraint families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    Attribute,
    Relation,
    Layout,
}

impl std::fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConstraintKind::Attribute => write!(f, "attribute"),
            ConstraintKind::Relation => write!(f, "relation"),
            ConstraintKind::Layout => write!(f, "layout"),
        }
    }
}

/// Machine-checkable payload of a constraint.
///
/// The simulation backend realizes and verifies constraints through this
/// payload; the natural-language `text` is what a live judge sees. Live
/// specifications may omit it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ConstraintCheck {
    /// Subject entity must carry `key = value`. The reserved key `text`
    /// addresses visible text rather than a plain attribute.
    Attribute { key: String, value: String },
    /// The named relation must hold over the subject entities, in order.
    Relation { name: String },
    /// Subject entity must sit in the given grid cell.
    Layout { row: u32, col: u32 },
}

/// An atomic verifiable condition over one or more entities.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintSpec {
    pub id: ItemId,
    pub kind: ConstraintKind,
    /// Atomic natural-language condition.
    pub text: String,
    /// Non-empty; attribute constraints have exactly one subject,
    /// relation constraints at least two.
    pub subject_entity_ids: Vec<ItemId>,
    /// Structured check used by the simulation backend; optional for live.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check: Option<ConstraintCheck>,
}

/// Who an unknown is meant to resolve.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "level", content = "id", rename_all = "snake_case")]
pub enum UnknownOwner {
    Prompt,
    Entity(ItemId),
    Constraint(ItemId),
}

impl UnknownOwner {
    /// Item id for entity- and constraint-level owners.
    pub fn item_id(&self) -> Option<&str> {
        match self {
            UnknownOwner::Prompt => None,
            UnknownOwner::Entity(id) | UnknownOwner::Constraint(id) => Some(id),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnknownStatus {
    Open,
    Resolved,
    Failed,
}

/// Unresolved information blocking reliable realization of a commitment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Unknown {
    pub id: ItemId,
    pub question: String,
    pub owner: UnknownOwner,
    pub needs_external_evidence: bool,
    pub status: UnknownStatus,
    /// Set iff `status == Resolved`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evidence_id: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvidenceSource {
    Retrieval,
    Reasoning,
}

/// Resolution material produced by a retrieval or reasoning skill call.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evidence {
    pub id: String,
    pub source: EvidenceSource,
    /// Non-empty resolution text.
    pub content: String,
    /// Query string plus result identifiers, or the rule identifier.
    pub provenance: String,
    pub created_at_iteration: u32,
}

/// Record of a repair decision against a violated item.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairDirective {
    pub target_item_id: ItemId,
    pub action: RepairAction,
    pub issued_at_iteration: u32,
    pub consumed: bool,
}

/// The evolving structured semantic specification.
///
/// Mutating operations consume `&self` and return a fresh snapshot with
/// `revision + 1`; callers decide which snapshots to keep.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemanticSpecification {
    pub entities: Vec<EntitySpec>,
    pub constraints: Vec<ConstraintSpec>,
    pub unknowns: Vec<Unknown>,
    pub repair_directives: Vec<RepairDirective>,
    pub revision: u64,
    /// Evidence notes attached at prompt level (prompt-owned unknowns).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub prompt_notes: Vec<String>,
}

impl Default for SemanticSpecification {
    fn default() -> Self {
        Self::new()
    }
}

/// One violated invariant found by [`SemanticSpecification::validate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecViolation {
    pub code: ViolationCode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub item_id: Option<ItemId>,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationCode {
    DuplicateId,
    EmptyName,
    MissingReference,
    BadSubjectCount,
    EvidenceStatusMismatch,
    DuplicateUnknown,
    EmptyField,
}

/// Outcome of validation; empty means the specification is well-formed.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<SpecViolation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Errors from specification mutations. Validation itself never errors.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum SpecError {
    #[error("unknown `{0}` not found")]
    UnknownNotFound(ItemId),
    #[error("unknown `{0}` is not open")]
    UnknownNotOpen(ItemId),
    #[error("item `{0}` not found")]
    ItemNotFound(ItemId),
    #[error("an unknown with the same owner and question already exists")]
    DuplicateUnknown,
    #[error("an unconsumed repair directive already targets item `{0}`")]
    DirectiveAlreadyPending(ItemId),
}

impl SemanticSpecification {
    pub fn new() -> Self {
        Self {
            entities: Vec::new(),
            constraints: Vec::new(),
            unknowns: Vec::new(),
            repair_directives: Vec::new(),
            revision: 0,
            prompt_notes: Vec::new(),
        }
    }

    /// Ordered item set `I = E ∪ C`: entities in insertion order, then
    /// constraints in insertion order.
    pub fn item_set(&self) -> Vec<ItemId> {
        self.entities
            .iter()
            .map(|e| e.id.clone())
            .chain(self.constraints.iter().map(|c| c.id.clone()))
            .collect()
    }

    pub fn entity(&self, id: &str) -> Option<&EntitySpec> {
        self.entities.iter().find(|e| e.id == id)
    }

    pub fn constraint(&self, id: &str) -> Option<&ConstraintSpec> {
        self.constraints.iter().find(|c| c.id == id)
    }

    /// True if `id` names an entity or constraint in this specification.
    pub fn has_item(&self, id: &str) -> bool {
        self.entity(id).is_some() || self.constraint(id).is_some()
    }

    pub fn unknown(&self, id: &str) -> Option<&Unknown> {
        self.unknowns.iter().find(|u| u.id == id)
    }

    /// Unknowns with status `Open`, in insertion order.
    pub fn open_unknowns(&self) -> Vec<&Unknown> {
        self.unknowns
            .iter()
            .filter(|u| u.status == UnknownStatus::Open)
            .collect()
    }

    /// True if the item owns an unknown that is open or terminally failed,
    /// i.e. the item still lacks information and must render as a placeholder.
    pub fn item_has_blocking_unknown(&self, item_id: &str) -> bool {
        self.unknowns.iter().any(|u| {
            u.owner.item_id() == Some(item_id)
                && matches!(u.status, UnknownStatus::Open | UnknownStatus::Failed)
        })
    }

    /// The unconsumed directive targeting `item_id`, if any.
    pub fn pending_directive(&self, item_id: &str) -> Option<&RepairDirective> {
        self.repair_directives
            .iter()
            .find(|d| !d.consumed && d.target_item_id == item_id)
    }

    /// All directives (consumed or not) ever issued for `item_id`.
    pub fn directives_for(&self, item_id: &str) -> Vec<&RepairDirective> {
        self.repair_directives
            .iter()
            .filter(|d| d.target_item_id == item_id)
            .collect()
    }

    /// Enumerate every violated invariant. Never aborts; an empty report
    /// means the specification is valid.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        for id in self
            .entities
            .iter()
            .map(|e| e.id.as_str())
            .chain(self.constraints.iter().map(|c| c.id.as_str()))
        {
            if !seen.insert(id) {
                violations.push(SpecViolation {
                    code: ViolationCode::DuplicateId,
                    item_id: Some(id.to_string()),
                    message: format!("id `{id}` is used by more than one entity or constraint"),
                });
            }
        }

        for e in &self.entities {
            if e.name.trim().is_empty() {
                violations.push(SpecViolation {
                    code: ViolationCode::EmptyName,
                    item_id: Some(e.id.clone()),
                    message: format!("entity `{}` has an empty name", e.id),
                });
            }
        }

        for c in &self.constraints {
            if c.subject_entity_ids.is_empty() {
                violations.push(SpecViolation {
                    code: ViolationCode::BadSubjectCount,
                    item_id: Some(c.id.clone()),
                    message: format!("constraint `{}` has no subject entities", c.id),
                });
            }
            for sid in &c.subject_entity_ids {
                if self.entity(sid).is_none() {
                    violations.push(SpecViolation {
                        code: ViolationCode::MissingReference,
                        item_id: Some(c.id.clone()),
                        message: format!(
                            "constraint `{}` references absent entity `{sid}`",
                            c.id
                        ),
                    });
                }
            }
            match c.kind {
                ConstraintKind::Attribute if c.subject_entity_ids.len() != 1 => {
                    violations.push(SpecViolation {
                        code: ViolationCode::BadSubjectCount,
                        item_id: Some(c.id.clone()),
                        message: format!(
                            "attribute constraint `{}` must have exactly one subject entity",
                            c.id
                        ),
                    });
                }
                ConstraintKind::Relation if c.subject_entity_ids.len() < 2 => {
                    violations.push(SpecViolation {
                        code: ViolationCode::BadSubjectCount,
                        item_id: Some(c.id.clone()),
                        message: format!(
                            "relation constraint `{}` must have at least two subject entities",
                            c.id
                        ),
                    });
                }
                _ => {}
            }
        }

        let mut unknown_ids: BTreeSet<&str> = BTreeSet::new();
        let mut owner_questions: BTreeSet<(String, &str)> = BTreeSet::new();
        for u in &self.unknowns {
            if !unknown_ids.insert(&u.id) {
                violations.push(SpecViolation {
                    code: ViolationCode::DuplicateId,
                    item_id: Some(u.id.clone()),
                    message: format!("unknown id `{}` is duplicated", u.id),
                });
            }
            if let Some(item) = u.owner.item_id() {
                if !self.has_item(item) {
                    violations.push(SpecViolation {
                        code: ViolationCode::MissingReference,
                        item_id: Some(u.id.clone()),
                        message: format!(
                            "unknown `{}` is owned by absent item `{item}`",
                            u.id
                        ),
                    });
                }
            }
            let resolved = u.status == UnknownStatus::Resolved;
            if resolved != u.evidence_id.is_some() {
                violations.push(SpecViolation {
                    code: ViolationCode::EvidenceStatusMismatch,
                    item_id: Some(u.id.clone()),
                    message: format!(
                        "unknown `{}` must carry evidence iff resolved (status {:?}, evidence {})",
                        u.id,
                        u.status,
                        if u.evidence_id.is_some() { "set" } else { "unset" }
                    ),
                });
            }
            let key = (format!("{:?}", u.owner), u.question.as_str());
            if !owner_questions.insert(key) {
                violations.push(SpecViolation {
                    code: ViolationCode::DuplicateUnknown,
                    item_id: Some(u.id.clone()),
                    message: format!(
                        "unknown `{}` duplicates another unknown's (owner, question)",
                        u.id
                    ),
                });
            }
        }

        for d in &self.repair_directives {
            if !self.has_item(&d.target_item_id) {
                violations.push(SpecViolation {
                    code: ViolationCode::MissingReference,
                    item_id: Some(d.target_item_id.clone()),
                    message: format!(
                        "repair directive targets absent item `{}`",
                        d.target_item_id
                    ),
                });
            }
        }

        ValidationReport { violations }
    }

    fn bumped(&self) -> Self {
        let mut next = self.clone();
        next.revision += 1;
        next
    }

    /// Resolve an open unknown with the given evidence. The evidence content
    /// is appended to the owner item as a note so later synthesis sees both
    /// the original wording and the resolution.
    pub fn update_with_evidence(
        &self,
        unknown_id: &str,
        evidence: &Evidence,
    ) -> Result<Self, SpecError> {
        let u = self
            .unknown(unknown_id)
            .ok_or_else(|| SpecError::UnknownNotFound(unknown_id.to_string()))?;
        if u.status != UnknownStatus::Open {
            return Err(SpecError::UnknownNotOpen(unknown_id.to_string()));
        }
        let owner = u.owner.clone();
        let mut next = self.bumped();
        {
            let u = next
                .unknowns
                .iter_mut()
                .find(|u| u.id == unknown_id)
                .expect("unknown present");
            u.status = UnknownStatus::Resolved;
            u.evidence_id = Some(evidence.id.clone());
        }
        next.attach_note(&owner, "evidence", &evidence.content)?;
        Ok(next)
    }

    /// Append a new open unknown owned by an existing entity or constraint.
    pub fn add_unknown(
        &self,
        item_id: &str,
        question: &str,
        needs_external: bool,
    ) -> Result<Self, SpecError> {
        let owner = if self.entity(item_id).is_some() {
            UnknownOwner::Entity(item_id.to_string())
        } else if self.constraint(item_id).is_some() {
            UnknownOwner::Constraint(item_id.to_string())
        } else {
            return Err(SpecError::ItemNotFound(item_id.to_string()));
        };
        if self
            .unknowns
            .iter()
            .any(|u| u.owner == owner && u.question == question)
        {
            return Err(SpecError::DuplicateUnknown);
        }
        let mut next = self.bumped();
        let id = format!("u-auto-{}-{}", item_id, next.unknowns.len() + 1);
        next.unknowns.push(Unknown {
            id,
            question: question.to_string(),
            owner,
            needs_external_evidence: needs_external,
            status: UnknownStatus::Open,
            evidence_id: None,
        });
        Ok(next)
    }

    /// Record a repair decision against a violated item. At most one
    /// unconsumed directive may target an item at a time.
    pub fn record_repair(
        &self,
        item_id: &str,
        action: RepairAction,
        iteration: u32,
    ) -> Result<Self, SpecError> {
        if !self.has_item(item_id) {
            return Err(SpecError::ItemNotFound(item_id.to_string()));
        }
        if self.pending_directive(item_id).is_some() {
            return Err(SpecError::DirectiveAlreadyPending(item_id.to_string()));
        }
        let mut next = self.bumped();
        next.repair_directives.push(RepairDirective {
            target_item_id: item_id.to_string(),
            action,
            issued_at_iteration: iteration,
            consumed: false,
        });
        Ok(next)
    }

    /// Mark the listed directives consumed. Ids are positions in
    /// `repair_directives`; out-of-range indices are ignored.
    pub fn consume_directives(&self, indices: &[usize]) -> Self {
        let mut next = self.bumped();
        for &i in indices {
            if let Some(d) = next.repair_directives.get_mut(i) {
                d.consumed = true;
            }
        }
        next
    }

    /// Mark an unknown terminally failed and annotate its owner item so the
    /// synthesizer keeps rendering it as unresolved.
    pub fn mark_unknown_failed(&self, unknown_id: &str) -> Result<Self, SpecError> {
        let u = self
            .unknown(unknown_id)
            .ok_or_else(|| SpecError::UnknownNotFound(unknown_id.to_string()))?;
        if u.status != UnknownStatus::Open {
            return Err(SpecError::UnknownNotOpen(unknown_id.to_string()));
        }
        let owner = u.owner.clone();
        let question = u.question.clone();
        let mut next = self.bumped();
        {
            let u = next
                .unknowns
                .iter_mut()
                .find(|u| u.id == unknown_id)
                .expect("unknown present");
            u.status = UnknownStatus::Failed;
        }
        next.attach_note(&owner, "unresolved", &question)?;
        Ok(next)
    }

    fn attach_note(&mut self, owner: &UnknownOwner, label: &str, content: &str) -> Result<(), SpecError> {
        match owner {
            UnknownOwner::Prompt => {
                self.prompt_notes.push(format!("[{label}] {content}"));
            }
            UnknownOwner::Entity(id) => {
                let e = self
                    .entities
                    .iter_mut()
                    .find(|e| e.id == *id)
                    .ok_or_else(|| SpecError::ItemNotFound(id.clone()))?;
                if e.description.is_empty() {
                    e.description = format!("[{label}: {content}]");
                } else {
                    e.description = format!("{} [{label}: {content}]", e.description);
                }
            }
            UnknownOwner::Constraint(id) => {
                let c = self
                    .constraints
                    .iter_mut()
                    .find(|c| c.id == *id)
                    .ok_or_else(|| SpecError::ItemNotFound(id.clone()))?;
                c.text = format!("{} [{label}: {content}]", c.text);
            }
        }
        Ok(())
    }

    /// Map of entity id to the constraints that name it as a subject.
    pub fn constraints_by_subject(&self) -> BTreeMap<&str, Vec<&ConstraintSpec>> {
        let mut map: BTreeMap<&str, Vec<&ConstraintSpec>> = BTreeMap::new();
        for c in &self.constraints {
            for sid in &c.subject_entity_ids {
                map.entry(sid.as_str()).or_default().push(c);
            }
        }
        map
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec_with_items() -> SemanticSpecification {
        let mut z = SemanticSpecification::new();
        z.entities.push(EntitySpec {
            id: "e1".into(),
            name: "striker".into(),
            description: "the home striker".into(),
            reference_ids: vec![],
        });
        z.entities.push(EntitySpec {
            id: "e2".into(),
            name: "trophy".into(),
            description: String::new(),
            reference_ids: vec![],
        });
        z.constraints.push(ConstraintSpec {
            id: "c1".into(),
            kind: ConstraintKind::Attribute,
            text: "striker jersey is red".into(),
            subject_entity_ids: vec!["e1".into()],
            check: Some(ConstraintCheck::Attribute {
                key: "jersey".into(),
                value: "red".into(),
            }),
        });
        z
    }

    fn evidence(id: &str) -> Evidence {
        Evidence {
            id: id.into(),
            source: EvidenceSource::Retrieval,
            content: "the jersey is red".into(),
            provenance: "query=jersey color; result=[f1]".into(),
            created_at_iteration: 1,
        }
    }

    #[test]
    fn empty_spec_is_valid() {
        assert!(SemanticSpecification::new().validate().is_valid());
    }

    #[test]
    fn absent_entity_reference_is_reported_by_id() {
        let mut z = spec_with_items();
        z.constraints.push(ConstraintSpec {
            id: "c9".into(),
            kind: ConstraintKind::Attribute,
            text: "ghost".into(),
            subject_entity_ids: vec!["e9".into()],
            check: None,
        });
        let report = z.validate();
        assert_eq!(report.violations.len(), 1);
        assert!(report.violations[0].message.contains("e9"));
        assert_eq!(report.violations[0].code, ViolationCode::MissingReference);
    }

    #[test]
    fn resolved_unknown_without_evidence_is_reported() {
        let mut z = spec_with_items();
        z.unknowns.push(Unknown {
            id: "u1".into(),
            question: "which color".into(),
            owner: UnknownOwner::Entity("e1".into()),
            needs_external_evidence: true,
            status: UnknownStatus::Resolved,
            evidence_id: None,
        });
        let report = z.validate();
        assert_eq!(report.violations.len(), 1);
        assert_eq!(
            report.violations[0].code,
            ViolationCode::EvidenceStatusMismatch
        );
    }

    #[test]
    fn subject_arity_rules() {
        let mut z = spec_with_items();
        z.constraints.push(ConstraintSpec {
            id: "c2".into(),
            kind: ConstraintKind::Relation,
            text: "striker holds trophy".into(),
            subject_entity_ids: vec!["e1".into()],
            check: None,
        });
        let report = z.validate();
        assert!(report
            .violations
            .iter()
            .any(|v| v.code == ViolationCode::BadSubjectCount));
    }

    #[test]
    fn item_set_orders_entities_then_constraints() {
        let z = spec_with_items();
        assert_eq!(z.item_set(), vec!["e1", "e2", "c1"]);
        assert!(SemanticSpecification::new().item_set().is_empty());
    }

    #[test]
    fn update_with_evidence_resolves_and_annotates_owner() {
        let mut z = spec_with_items();
        z.unknowns.push(Unknown {
            id: "u1".into(),
            question: "which jersey color".into(),
            owner: UnknownOwner::Entity("e1".into()),
            needs_external_evidence: true,
            status: UnknownStatus::Open,
            evidence_id: None,
        });
        let before = z.revision;
        let next = z.update_with_evidence("u1", &evidence("ev1")).unwrap();
        assert_eq!(next.revision, before + 1);
        let u = next.unknown("u1").unwrap();
        assert_eq!(u.status, UnknownStatus::Resolved);
        assert_eq!(u.evidence_id.as_deref(), Some("ev1"));
        assert!(next.entity("e1").unwrap().description.contains("evidence"));
        assert!(next.validate().is_valid());

        // resolving twice violates the open precondition
        let err = next.update_with_evidence("u1", &evidence("ev2")).unwrap_err();
        assert_eq!(err, SpecError::UnknownNotOpen("u1".into()));
    }

    #[test]
    fn prompt_level_evidence_lands_in_prompt_notes() {
        let mut z = spec_with_items();
        z.unknowns.push(Unknown {
            id: "u1".into(),
            question: "overall mood".into(),
            owner: UnknownOwner::Prompt,
            needs_external_evidence: false,
            status: UnknownStatus::Open,
            evidence_id: None,
        });
        let next = z.update_with_evidence("u1", &evidence("ev1")).unwrap();
        assert_eq!(next.prompt_notes.len(), 1);
        // entities and constraints are untouched apart from the unknown itself
        assert_eq!(next.entities, z.entities);
        assert_eq!(next.constraints, z.constraints);
    }

    #[test]
    fn add_unknown_grows_and_rejects_duplicates() {
        let z = spec_with_items();
        let next = z.add_unknown("e2", "which jersey color", true).unwrap();
        assert_eq!(next.unknowns.len(), 1);
        assert_eq!(next.revision, z.revision + 1);
        let err = next.add_unknown("e2", "which jersey color", true).unwrap_err();
        assert_eq!(err, SpecError::DuplicateUnknown);
        let err = z.add_unknown("zzz", "q", false).unwrap_err();
        assert_eq!(err, SpecError::ItemNotFound("zzz".into()));
    }

    #[test]
    fn record_repair_enforces_single_pending_directive() {
        let z = spec_with_items();
        let action = RepairAction::EditArtifact {
            instruction: "fix the jersey".into(),
            target_item_id: "c1".into(),
        };
        let next = z.record_repair("c1", action.clone(), 1).unwrap();
        assert_eq!(next.repair_directives.len(), 1);
        let err = next.record_repair("c1", action.clone(), 1).unwrap_err();
        assert_eq!(err, SpecError::DirectiveAlreadyPending("c1".into()));

        // once consumed, a new directive for the same item is accepted
        let consumed = next.consume_directives(&[0]);
        assert!(consumed.repair_directives[0].consumed);
        assert!(consumed.record_repair("c1", action, 2).is_ok());
    }

    #[test]
    fn mark_unknown_failed_annotates_owner() {
        let mut z = spec_with_items();
        z.unknowns.push(Unknown {
            id: "u1".into(),
            question: "which pose".into(),
            owner: UnknownOwner::Constraint("c1".into()),
            needs_external_evidence: true,
            status: UnknownStatus::Open,
            evidence_id: None,
        });
        let next = z.mark_unknown_failed("u1").unwrap();
        assert_eq!(next.unknown("u1").unwrap().status, UnknownStatus::Failed);
        assert!(next.constraint("c1").unwrap().text.contains("unresolved"));
        assert!(next.item_has_blocking_unknown("c1"));
        assert!(next.validate().is_valid());
    }

    #[test]
    fn serialization_uses_contract_field_names() {
        let z = spec_with_items();
        let doc = serde_json::to_value(&z).unwrap();
        for key in ["entities", "constraints", "unknowns", "repair_directives", "revision"] {
            assert!(doc.get(key).is_some(), "missing top-level key {key}");
        }
    }
}

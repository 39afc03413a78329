//! The trust audit: who must be trusted for a ledger deployment to work?
//!
//! A distributed ledger removes the trusted third party from an application
//! exactly when two structural criteria hold:
//!
//! 1. **Object creation** — every object the ledger tracks must come into
//!    existence *as* a ledger entry (minted by the protocol, by consensus,
//!    or by a contract hook). The moment an entry merely *represents*
//!    something that exists outside the ledger, whoever registers it vouches
//!    for the correspondence and must be trusted for it.
//! 2. **Internal predicates** — every validity predicate must be decidable
//!    from the ledger's own contents. The moment validation consults an
//!    oracle for outside facts, the oracle (and whoever operates it) must be
//!    trusted.
//!
//! [`audit_trust`] derives the set of trusted parties a deployment still
//! depends on; it is empty precisely when both criteria are met. The
//! equivalence is not an accident of the implementation but its design
//! invariant, and the test suite asserts it over randomized audits.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::ledger::{PayloadKind, RecordSequence};
use crate::validation::{is_hook_emitted, Dependency, Oracle, PredicateDecl};

/// How created objects relate to the world outside the ledger.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CreationMode {
    /// Objects exist only as ledger entries; creation is a protocol event
    /// and needs nobody's vouching (a freshly minted coin, a registry name).
    ConsensusBased,
    /// Objects stand for artifacts that exist off the ledger; whoever
    /// records one vouches that the entry matches reality (a diamond, an
    /// insured house, a shipment).
    PartyCreated,
}

impl CreationMode {
    pub fn name(&self) -> &'static str {
        match self {
            CreationMode::ConsensusBased => "consensus-based",
            CreationMode::PartyCreated => "party-created",
        }
    }

    pub fn parse(s: &str) -> Option<CreationMode> {
        match s {
            "consensus-based" => Some(CreationMode::ConsensusBased),
            "party-created" => Some(CreationMode::PartyCreated),
            _ => None,
        }
    }
}

impl std::fmt::Display for CreationMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A party or facility the deployment cannot function without trusting.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TrustedParty {
    /// Registers ledger entries for objects that exist outside the ledger;
    /// trusted to register them truthfully.
    ObjectCreationAuthority { party: String, creations: u64 },
    /// Answers validation queries about outside facts; trusted to answer
    /// truthfully.
    ExternalOracle { oracle: String },
    /// Operates an external oracle and could skew its answers.
    PrivilegedValidator { party: String, oracle: String },
}

impl TrustedParty {
    pub fn describe(&self) -> String {
        match self {
            TrustedParty::ObjectCreationAuthority { party, creations } => format!(
                "{party} registers objects on the ledger ({creations} creation{}) and is trusted to register only real ones",
                if *creations == 1 { "" } else { "s" }
            ),
            TrustedParty::ExternalOracle { oracle } => {
                format!("oracle \"{oracle}\" supplies outside facts to validation and is trusted to answer truthfully")
            }
            TrustedParty::PrivilegedValidator { party, oracle } => {
                format!("{party} operates oracle \"{oracle}\" and is trusted not to skew its answers")
            }
        }
    }
}

/// One criterion's outcome with the evidence that produced it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriterionVerdict {
    pub met: bool,
    /// Human-readable findings: violations when the criterion failed,
    /// confirmations when it held.
    pub evidence: Vec<String>,
}

/// Everything the trust audit inspects about one deployment.
#[derive(Debug, Clone)]
pub struct UseCaseAudit {
    pub name: String,
    pub creation_mode: CreationMode,
    pub decls: Vec<PredicateDecl>,
    pub oracles: Vec<Oracle>,
    /// The (decided) ledger contents under audit.
    pub sequence: RecordSequence,
    /// Oracle query counts observed while validating `sequence`.
    pub consulted: BTreeMap<String, u64>,
}

/// The audit's findings for one deployment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrustAuditReport {
    pub use_case: String,
    pub creation_mode: CreationMode,
    pub object_creation: CriterionVerdict,
    pub internal_predicate: CriterionVerdict,
    pub trusted: BTreeSet<TrustedParty>,
    /// The headline: true exactly when `trusted` is empty, i.e. when both
    /// criteria are met and the ledger replaces the trusted third party.
    pub replaces_trusted_third_party: bool,
}

/// Parties that created objects through ordinary records — protocol output
/// (genesis, contract hooks) never counts, because nobody vouches for it.
fn party_creations(sequence: &RecordSequence) -> BTreeMap<String, u64> {
    let mut creators: BTreeMap<String, u64> = BTreeMap::new();
    for record in sequence {
        if record.payload.kind != PayloadKind::Create {
            continue;
        }
        if record.proposer.is_system() || is_hook_emitted(record) {
            continue;
        }
        *creators.entry(record.proposer.token()).or_insert(0) += 1;
    }
    creators
}

/// Does every tracked object exist only as a ledger entry?
pub fn check_object_creation_criterion(
    mode: CreationMode,
    sequence: &RecordSequence,
) -> (CriterionVerdict, BTreeSet<TrustedParty>) {
    let creators = party_creations(sequence);
    match mode {
        CreationMode::ConsensusBased => {
            let evidence = if creators.is_empty() {
                vec!["no party registers outside objects; all tracked objects are protocol output".to_string()]
            } else {
                vec![format!(
                    "objects are minted as ledger entries; the {} creating part{} vouch for nothing outside the ledger",
                    creators.len(),
                    if creators.len() == 1 { "y" } else { "ies" }
                )]
            };
            (CriterionVerdict { met: true, evidence }, BTreeSet::new())
        }
        CreationMode::PartyCreated => {
            if creators.is_empty() {
                // Nothing was registered, so nobody had to be trusted yet —
                // but the mode alone does not fail the criterion without a
                // creating party to point at.
                let verdict = CriterionVerdict {
                    met: true,
                    evidence: vec![
                        "objects would represent outside artifacts, but none were registered"
                            .to_string(),
                    ],
                };
                return (verdict, BTreeSet::new());
            }
            let trusted: BTreeSet<TrustedParty> = creators
                .iter()
                .map(|(party, &creations)| TrustedParty::ObjectCreationAuthority {
                    party: party.clone(),
                    creations,
                })
                .collect();
            let evidence = trusted.iter().map(TrustedParty::describe).collect();
            (CriterionVerdict { met: false, evidence }, trusted)
        }
    }
}

/// Is every validity predicate decidable from the ledger alone?
pub fn check_internal_predicate_criterion(
    decls: &[PredicateDecl],
    oracles: &[Oracle],
    consulted: &BTreeMap<String, u64>,
) -> (CriterionVerdict, BTreeSet<TrustedParty>) {
    let operators: BTreeMap<&str, &Oracle> =
        oracles.iter().map(|o| (o.name.as_str(), o)).collect();
    let mut trusted = BTreeSet::new();
    let mut evidence = Vec::new();

    let mut implicate = |name: &str, why: String, evidence: &mut Vec<String>| {
        let newly = trusted.insert(TrustedParty::ExternalOracle { oracle: name.to_string() });
        if newly {
            evidence.push(why);
        }
        if let Some(oracle) = operators.get(name) {
            if let Some(op) = &oracle.operator {
                trusted.insert(TrustedParty::PrivilegedValidator {
                    party: op.token(),
                    oracle: name.to_string(),
                });
            }
        }
    };

    for decl in decls {
        if decl.dependency == Dependency::External {
            let name = decl.oracle.as_deref().unwrap_or("unnamed");
            implicate(
                name,
                format!(
                    "predicate \"{}\" cannot be decided from the ledger; it queries oracle \"{name}\"",
                    decl.name
                ),
                &mut evidence,
            );
        }
    }
    for (name, &count) in consulted {
        if count > 0 {
            implicate(
                name,
                format!("oracle \"{name}\" was consulted {count} time{} during validation", if count == 1 { "" } else { "s" }),
                &mut evidence,
            );
        }
    }

    if trusted.is_empty() {
        let verdict = CriterionVerdict {
            met: true,
            evidence: vec![
                "every predicate is decided from ledger contents alone; no oracle was consulted"
                    .to_string(),
            ],
        };
        (verdict, trusted)
    } else {
        for t in &trusted {
            if matches!(t, TrustedParty::PrivilegedValidator { .. }) {
                evidence.push(t.describe());
            }
        }
        (CriterionVerdict { met: false, evidence }, trusted)
    }
}

/// Run both criteria and derive the trusted set. The headline equivalence —
/// the trusted set is empty if and only if both criteria are met — holds by
/// construction: each criterion contributes trusted parties exactly when it
/// fails.
pub fn audit_trust(audit: &UseCaseAudit) -> TrustAuditReport {
    let (object_creation, creation_trust) =
        check_object_creation_criterion(audit.creation_mode, &audit.sequence);
    let (internal_predicate, predicate_trust) =
        check_internal_predicate_criterion(&audit.decls, &audit.oracles, &audit.consulted);

    let mut trusted = creation_trust;
    trusted.extend(predicate_trust);
    let replaces = trusted.is_empty();
    debug_assert_eq!(replaces, object_creation.met && internal_predicate.met);

    TrustAuditReport {
        use_case: audit.name.clone(),
        creation_mode: audit.creation_mode,
        object_creation,
        internal_predicate,
        trusted,
        replaces_trusted_third_party: replaces,
    }
}

/// A short, human-readable summary of an audit report.
pub fn explain_verdict(report: &TrustAuditReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{}: object creation {}, internal predicates {} -> {}\n",
        report.use_case,
        if report.object_creation.met { "met" } else { "not met" },
        if report.internal_predicate.met { "met" } else { "not met" },
        if report.replaces_trusted_third_party {
            "the ledger replaces the trusted third party"
        } else {
            "a trusted third party remains"
        },
    ));
    for t in &report.trusted {
        out.push_str(&format!("  trusted: {}\n", t.describe()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ledger::{make_record, ObjectId, PartyId, Payload, Record, Scalar};
    use crate::validation::{OracleBehavior, RuleSpec, Scope};

    fn create_record(index: u64, proposer: &PartyId, object: u64, nonce: u64) -> Record {
        let payload = Payload::new(
            PayloadKind::Create,
            [(
                "object_id".to_string(),
                Scalar::str(format!("seq:{object}")).unwrap(),
            )],
        )
        .unwrap();
        make_record(
            index,
            [proposer.clone()],
            [ObjectId::sequential(object)],
            payload,
            proposer.clone(),
            nonce,
        )
        .unwrap()
    }

    fn hook_create_record(index: u64, object: u64, nonce: u64) -> Record {
        let payload = Payload::new(
            PayloadKind::Create,
            [
                (
                    "object_id".to_string(),
                    Scalar::str(format!("seq:{object}")).unwrap(),
                ),
                ("hook".to_string(), Scalar::str("minter").unwrap()),
            ],
        )
        .unwrap();
        make_record(
            index,
            [PartyId::system()],
            [ObjectId::sequential(object)],
            payload,
            PartyId::system(),
            nonce,
        )
        .unwrap()
    }

    fn audit(
        mode: CreationMode,
        decls: Vec<PredicateDecl>,
        oracles: Vec<Oracle>,
        records: Vec<Record>,
        consulted: BTreeMap<String, u64>,
    ) -> TrustAuditReport {
        audit_trust(&UseCaseAudit {
            name: "case".to_string(),
            creation_mode: mode,
            decls,
            oracles,
            sequence: RecordSequence::from_records(records).unwrap(),
            consulted,
        })
    }

    #[test]
    fn consensus_creation_and_internal_rules_need_no_trust() {
        let minter = PartyId::new(1, "mint").unwrap();
        let report = audit(
            CreationMode::ConsensusBased,
            vec![PredicateDecl::internal("no-double-spend", RuleSpec::NoDoubleSpend)],
            Vec::new(),
            vec![create_record(0, &minter, 1, 0), create_record(1, &minter, 2, 1)],
            BTreeMap::new(),
        );
        assert!(report.object_creation.met);
        assert!(report.internal_predicate.met);
        assert!(report.trusted.is_empty());
        assert!(report.replaces_trusted_third_party);
    }

    #[test]
    fn party_created_objects_make_their_registrars_trusted() {
        let notary = PartyId::new(5, "notary").unwrap();
        let report = audit(
            CreationMode::PartyCreated,
            Vec::new(),
            Vec::new(),
            vec![create_record(0, &notary, 1, 0), create_record(1, &notary, 2, 1)],
            BTreeMap::new(),
        );
        assert!(!report.object_creation.met);
        assert!(!report.replaces_trusted_third_party);
        assert_eq!(
            report.trusted.iter().collect::<Vec<_>>(),
            vec![&TrustedParty::ObjectCreationAuthority {
                party: notary.token(),
                creations: 2
            }]
        );
    }

    #[test]
    fn protocol_output_is_never_a_trust_burden() {
        // Hook-minted and system-proposed creations vouch for nothing
        // outside the ledger, even in party-created deployments.
        let report = audit(
            CreationMode::PartyCreated,
            Vec::new(),
            Vec::new(),
            vec![hook_create_record(0, 1, 1 << 32)],
            BTreeMap::new(),
        );
        assert!(report.object_creation.met);
        assert!(report.replaces_trusted_third_party);
    }

    #[test]
    fn external_predicates_implicate_the_oracle_and_its_operator() {
        let adjuster = PartyId::new(9, "adjuster").unwrap();
        let oracle = Oracle {
            name: "damage-assessor".to_string(),
            operator: Some(adjuster.clone()),
            behavior: OracleBehavior::Truthful,
        };
        let decl = PredicateDecl::external(
            "damage-confirmed",
            "damage-assessor",
            RuleSpec::PropertyEquals {
                property: "damaged".to_string(),
                expect: crate::validation::Expect::Literal(Scalar::Bool(true)),
                applies_to: Some(PayloadKind::ContractInvoke),
            },
        );
        let report = audit(
            CreationMode::ConsensusBased,
            vec![decl],
            vec![oracle],
            Vec::new(),
            BTreeMap::new(),
        );
        assert!(report.object_creation.met);
        assert!(!report.internal_predicate.met);
        assert!(!report.replaces_trusted_third_party);
        let kinds: Vec<_> = report.trusted.iter().collect();
        assert_eq!(
            kinds,
            vec![
                &TrustedParty::ExternalOracle { oracle: "damage-assessor".to_string() },
                &TrustedParty::PrivilegedValidator {
                    party: adjuster.token(),
                    oracle: "damage-assessor".to_string()
                },
            ]
        );
    }

    #[test]
    fn runtime_consultation_alone_fails_the_predicate_criterion() {
        // Even if every declaration looks internal, observed oracle traffic
        // is proof of an external dependency.
        let mut consulted = BTreeMap::new();
        consulted.insert("gps-feed".to_string(), 3_u64);
        let report = audit(
            CreationMode::ConsensusBased,
            vec![PredicateDecl::internal("no-double-spend", RuleSpec::NoDoubleSpend)],
            Vec::new(),
            Vec::new(),
            consulted,
        );
        assert!(!report.internal_predicate.met);
        assert!(report
            .trusted
            .contains(&TrustedParty::ExternalOracle { oracle: "gps-feed".to_string() }));
    }

    #[test]
    fn declared_but_unused_oracles_cost_nothing() {
        let oracle = Oracle {
            name: "idle".to_string(),
            operator: None,
            behavior: OracleBehavior::Truthful,
        };
        let mut consulted = BTreeMap::new();
        consulted.insert("idle".to_string(), 0_u64);
        let report = audit(
            CreationMode::ConsensusBased,
            vec![PredicateDecl::internal("no-double-spend", RuleSpec::NoDoubleSpend)],
            vec![oracle],
            Vec::new(),
            consulted,
        );
        assert!(report.internal_predicate.met);
        assert!(report.replaces_trusted_third_party);
    }

    #[test]
    fn trusted_set_is_empty_exactly_when_both_criteria_hold() {
        // Sweep all combinations of the four trust-relevant ingredients and
        // assert the headline equivalence on every one.
        let party = PartyId::new(2, "registrar").unwrap();
        let oracle = Oracle {
            name: "feed".to_string(),
            operator: Some(PartyId::new(3, "operator").unwrap()),
            behavior: OracleBehavior::Truthful,
        };
        for mode in [CreationMode::ConsensusBased, CreationMode::PartyCreated] {
            for has_creates in [false, true] {
                for has_external_decl in [false, true] {
                    for was_consulted in [false, true] {
                        let records = if has_creates {
                            vec![create_record(0, &party, 1, 0)]
                        } else {
                            Vec::new()
                        };
                        let decls = if has_external_decl {
                            vec![PredicateDecl::external(
                                "check",
                                "feed",
                                RuleSpec::PropertyEquals {
                                    property: "ok".to_string(),
                                    expect: crate::validation::Expect::Literal(Scalar::Bool(
                                        true,
                                    )),
                                    applies_to: None,
                                },
                            )]
                        } else {
                            vec![PredicateDecl::internal(
                                "check",
                                RuleSpec::NoDoubleSpend,
                            )]
                        };
                        let mut consulted = BTreeMap::new();
                        if was_consulted {
                            consulted.insert("feed".to_string(), 1_u64);
                        }
                        let report = audit(
                            mode,
                            decls,
                            vec![oracle.clone()],
                            records,
                            consulted,
                        );
                        assert_eq!(
                            report.trusted.is_empty(),
                            report.object_creation.met && report.internal_predicate.met,
                            "equivalence must hold for every combination"
                        );
                        assert_eq!(
                            report.replaces_trusted_third_party,
                            report.trusted.is_empty()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn explanations_name_the_verdict_and_the_trusted_parties() {
        let notary = PartyId::new(5, "notary").unwrap();
        let report = audit(
            CreationMode::PartyCreated,
            Vec::new(),
            Vec::new(),
            vec![create_record(0, &notary, 1, 0)],
            BTreeMap::new(),
        );
        let text = explain_verdict(&report);
        assert!(text.contains("a trusted third party remains"));
        assert!(text.contains("notary"));

        let clean = audit(
            CreationMode::ConsensusBased,
            Vec::new(),
            Vec::new(),
            Vec::new(),
            BTreeMap::new(),
        );
        assert!(explain_verdict(&clean).contains("replaces the trusted third party"));
    }

    #[test]
    fn scope_of_predicates_does_not_affect_the_audit() {
        // Sequence-scope internal rules (vote thresholds) are as internal as
        // record-scope ones.
        let decl = PredicateDecl::internal(
            "approval",
            RuleSpec::VoteThreshold {
                property: "approve".to_string(),
                threshold: crate::validation::Fraction::new(1, 2),
            },
        );
        assert_eq!(decl.scope, Scope::Sequence);
        let report = audit(
            CreationMode::ConsensusBased,
            vec![decl],
            Vec::new(),
            Vec::new(),
            BTreeMap::new(),
        );
        assert!(report.internal_predicate.met);
    }
}

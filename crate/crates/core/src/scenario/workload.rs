//! Workload generators: deterministic record streams for each use-case
//! family, parameterized by the scenario file.
//!
//! A generator turns party groups and a handful of knobs into a proposal
//! schedule plus the surrounding world — genesis objects, ground-truth
//! facts, starting balances. Object creation honors the effective creation
//! mode: consensus-based creation materializes objects as genesis
//! descriptors, party-based creation schedules create records proposed by
//! the responsible group.
//!
//! Fraud toggles extend the honest stream with the dishonest records the
//! use case is worried about, together with the ground truth that exposes
//! them and the oracle lies that would cover for them.

use std::collections::BTreeMap;

use crate::consensus::ScheduledProposal;
use crate::criteria::CreationMode;
use crate::ledger::{
    make_record, ObjectDescriptor, ObjectId, PartyId, Payload, PayloadKind, Scalar,
};

use super::parse::Node;
use super::ScenarioError;

/// Object-id ranges, one disjoint block per object family so sequences from
/// different workloads never collide with each other or with hook output.
pub const SUPPLY_SEQ_BASE: u64 = 500;
pub const ITEM_SEQ_BASE: u64 = 2000;
pub const ITEM_FRAUD_SEQ: u64 = 2100;
pub const LOT_SEQ_BASE: u64 = 3000;
pub const LOSS_SEQ_BASE: u64 = 4000;
pub const LOSS_FRAUD_SEQ: u64 = 4100;
pub const POLICY_SEQ_BASE: u64 = 4500;
pub const GOOD_SEQ_BASE: u64 = 5000;
pub const CONTAINER_SEQ_BASE: u64 = 6000;

/// Everything a workload contributes to a scenario.
#[derive(Debug, Clone, Default)]
pub struct WorkloadPlan {
    /// Proposals in causal order, availability already staggered.
    pub schedule: Vec<ScheduledProposal>,
    /// Objects that predate the run (consensus-created).
    pub genesis: Vec<ObjectDescriptor>,
    /// Ground truth behind the oracles: (object, property, value).
    pub facts: Vec<(ObjectId, String, Scalar)>,
    /// Starting balances: (property, party label, amount).
    pub balances: Vec<(String, String, i64)>,
    /// Oracle overrides that active frauds rely on; merged into every
    /// declared oracle's behavior, since only one oracle is ever asked for
    /// a given (object, property) fact.
    pub lies: Vec<(ObjectId, String, Scalar)>,
}

/// What a generator gets to work with.
pub struct WorkloadContext<'a> {
    pub groups: &'a BTreeMap<String, Vec<PartyId>>,
    pub creation_mode: CreationMode,
    /// Active fraud toggles with the file line that enabled each.
    pub frauds: &'a [(String, usize)],
    /// Line of the workload declaration, for parameter errors.
    pub line: usize,
}

impl WorkloadContext<'_> {
    fn group(&self, name: &str) -> Result<&[PartyId], ScenarioError> {
        self.groups
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| {
                ScenarioError::invalid(self.line, format!("workload references unknown group `{name}`"))
            })
    }

    fn check_frauds(&self, supported: &[&str]) -> Result<(), ScenarioError> {
        for (fraud, line) in self.frauds {
            if !supported.contains(&fraud.as_str()) {
                return Err(ScenarioError::invalid(
                    *line,
                    format!(
                        "this workload does not model fraud `{fraud}` (supported: {})",
                        if supported.is_empty() {
                            "none".to_string()
                        } else {
                            supported.join(", ")
                        }
                    ),
                ));
            }
        }
        Ok(())
    }

    fn fraud(&self, name: &str) -> bool {
        self.frauds.iter().any(|(f, _)| f == name)
    }
}

/// Accumulates records with fresh nonces and staggered availability.
struct PlanBuilder {
    plan: WorkloadPlan,
    nonce: u64,
    round: u64,
}

const AVAILABILITY_SPACING: u64 = 2;

impl PlanBuilder {
    fn new() -> Self {
        PlanBuilder {
            plan: WorkloadPlan::default(),
            nonce: 0,
            round: 1,
        }
    }

    fn push(
        &mut self,
        parties: impl IntoIterator<Item = PartyId>,
        objects: impl IntoIterator<Item = ObjectId>,
        payload: Payload,
        proposer: &PartyId,
    ) -> Result<(), ScenarioError> {
        let record = make_record(0, parties, objects, payload, proposer.clone(), self.nonce)?;
        self.nonce += 1;
        self.plan.schedule.push(ScheduledProposal {
            available_from: self.round,
            record,
        });
        self.round += AVAILABILITY_SPACING;
        Ok(())
    }

    /// Bring an object into existence per the creation mode: a genesis
    /// descriptor, or a create record proposed by `creator`.
    fn create_object(
        &mut self,
        mode: CreationMode,
        id: ObjectId,
        creator: &PartyId,
    ) -> Result<(), ScenarioError> {
        match mode {
            CreationMode::ConsensusBased => {
                self.plan
                    .genesis
                    .push(ObjectDescriptor::genesis(id, BTreeMap::new()));
                Ok(())
            }
            CreationMode::PartyCreated => self.push(
                [creator.clone()],
                [id],
                create_payload(&id)?,
                creator,
            ),
        }
    }

    fn fact(&mut self, id: ObjectId, property: &str, value: Scalar) {
        self.plan.facts.push((id, property.to_string(), value));
    }

    fn lie(&mut self, id: ObjectId, property: &str, value: Scalar) {
        self.plan.lies.push((id, property.to_string(), value));
    }
}

fn create_payload(id: &ObjectId) -> Result<Payload, ScenarioError> {
    Ok(Payload::new(
        PayloadKind::Create,
        [("object_id".to_string(), Scalar::str(id.token())?)],
    )?)
}

fn transfer_payload(
    amount: i64,
    from: &PartyId,
    to: &PartyId,
    property: &str,
) -> Result<Payload, ScenarioError> {
    Ok(Payload::new(
        PayloadKind::Transfer,
        [
            ("amount".to_string(), Scalar::Int(amount)),
            ("from".to_string(), Scalar::str(from.label.as_str())?),
            ("to".to_string(), Scalar::str(to.label.as_str())?),
            ("property".to_string(), Scalar::str(property)?),
        ],
    )?)
}

fn claim_payload(id: &ObjectId, claimant: &PartyId) -> Result<Payload, ScenarioError> {
    Ok(Payload::new(
        PayloadKind::Claim,
        [
            ("object_id".to_string(), Scalar::str(id.token())?),
            ("claimant".to_string(), Scalar::str(claimant.label.as_str())?),
        ],
    )?)
}

fn assert_payload(property: &str, value: Scalar) -> Result<Payload, ScenarioError> {
    Ok(Payload::new(
        PayloadKind::Assert,
        [
            ("property".to_string(), Scalar::str(property)?),
            ("value".to_string(), value),
        ],
    )?)
}

fn invoke_payload(contract: &str) -> Result<Payload, ScenarioError> {
    Ok(Payload::new(
        PayloadKind::ContractInvoke,
        [("contract".to_string(), Scalar::str(contract)?)],
    )?)
}

/// The closed set of workload families a scenario can run.
#[derive(Debug, Clone, PartialEq)]
pub enum Workload {
    /// Balance transfers in one currency dimension among a holder group,
    /// optionally with per-holder supply objects and settlement marks.
    CoinTransfers {
        holders: String,
        transfers: u64,
        amount: i64,
        property: String,
        start_balance: i64,
        /// Each holder brings its own supply object into existence.
        issue_supply: bool,
        /// Mark this property true on the sender's supply object after every
        /// transfer (requires `issue_supply`).
        settle_property: Option<String>,
    },
    /// Unique physical items registered by one group and sold to another,
    /// with certification facts behind an oracle.
    /// Frauds: `fence-sale`, `re-register-stolen`.
    Registry {
        registrars: String,
        buyers: String,
        items: u64,
    },
    /// Claims filed against losses. The specific variant has customers bring
    /// their own loss objects; the generic variant claims pre-agreed
    /// policies. Frauds: `duplicate-claim`, `undamaged-claim`.
    InsuranceClaims {
        insurers: String,
        customers: String,
        claims: u64,
        generic: bool,
    },
    /// Production lots with metered readings asserted onto the ledger.
    MeteredProduction {
        meters: String,
        lots: u64,
        reading: i64,
    },
    /// Goods moving through custody with lab-graded quality and a release
    /// vote.
    ChainOfCustody {
        suppliers: String,
        inspectors: String,
        goods: u64,
        grade: String,
        approvals_yes: u64,
        approvals_no: u64,
    },
    /// Containers moving through checkpoints; payment requests are only
    /// honored once position data confirms arrival.
    Shipment {
        carriers: String,
        containers: u64,
        legs: u64,
    },
}

impl Workload {
    /// Parse a `workload <kind> { ... }` node.
    pub fn from_node(node: &Node) -> Result<Workload, ScenarioError> {
        let kind = node.arg(0)?;
        match kind {
            "coin-transfers" => {
                node.expect_keys(&[
                    "holders",
                    "transfers",
                    "amount",
                    "property",
                    "start-balance",
                    "issue-supply",
                    "settle-property",
                ])?;
                let issue_supply = match node.child("issue-supply") {
                    Some(c) => c.bool_arg(0)?,
                    None => false,
                };
                let settle_property = node.leaf_str_opt("settle-property")?.map(str::to_string);
                if settle_property.is_some() && !issue_supply {
                    return Err(ScenarioError::invalid(
                        node.line,
                        "settle-property needs issue-supply true (marks go on supply objects)"
                            .to_string(),
                    ));
                }
                Ok(Workload::CoinTransfers {
                    holders: node.leaf_str("holders")?.to_string(),
                    transfers: node.leaf_uint("transfers")?,
                    amount: node.leaf_int_or("amount", 1)?,
                    property: node
                        .leaf_str_opt("property")?
                        .unwrap_or("balance")
                        .to_string(),
                    start_balance: node.leaf_int_or("start-balance", 100)?,
                    issue_supply,
                    settle_property,
                })
            }
            "registry" => {
                node.expect_keys(&["registrars", "buyers", "items"])?;
                Ok(Workload::Registry {
                    registrars: node.leaf_str("registrars")?.to_string(),
                    buyers: node.leaf_str("buyers")?.to_string(),
                    items: node.leaf_uint("items")?,
                })
            }
            "insurance-claims" => {
                node.expect_keys(&["insurers", "customers", "claims", "variant"])?;
                let generic = match node.leaf_str_opt("variant")? {
                    None | Some("specific") => false,
                    Some("generic") => true,
                    Some(other) => {
                        return Err(ScenarioError::invalid(
                            node.require_child("variant")?.line,
                            format!("variant must be specific or generic, got {other:?}"),
                        ))
                    }
                };
                Ok(Workload::InsuranceClaims {
                    insurers: node.leaf_str("insurers")?.to_string(),
                    customers: node.leaf_str("customers")?.to_string(),
                    claims: node.leaf_uint("claims")?,
                    generic,
                })
            }
            "metered-production" => {
                node.expect_keys(&["meters", "lots", "reading"])?;
                Ok(Workload::MeteredProduction {
                    meters: node.leaf_str("meters")?.to_string(),
                    lots: node.leaf_uint("lots")?,
                    reading: node.leaf_int_or("reading", 120)?,
                })
            }
            "chain-of-custody" => {
                node.expect_keys(&[
                    "suppliers",
                    "inspectors",
                    "goods",
                    "grade",
                    "approvals-yes",
                    "approvals-no",
                ])?;
                Ok(Workload::ChainOfCustody {
                    suppliers: node.leaf_str("suppliers")?.to_string(),
                    inspectors: node.leaf_str("inspectors")?.to_string(),
                    goods: node.leaf_uint("goods")?,
                    grade: node.leaf_str_opt("grade")?.unwrap_or("A").to_string(),
                    approvals_yes: node.leaf_uint_or("approvals-yes", 0)?,
                    approvals_no: node.leaf_uint_or("approvals-no", 0)?,
                })
            }
            "shipment" => {
                node.expect_keys(&["carriers", "containers", "legs"])?;
                Ok(Workload::Shipment {
                    carriers: node.leaf_str("carriers")?.to_string(),
                    containers: node.leaf_uint("containers")?,
                    legs: node.leaf_uint_or("legs", 2)?,
                })
            }
            other => Err(ScenarioError::invalid(
                node.line,
                format!("unknown workload kind `{other}`"),
            )),
        }
    }

    /// Materialize the plan for this workload under the given context.
    pub fn generate(&self, ctx: &WorkloadContext<'_>) -> Result<WorkloadPlan, ScenarioError> {
        let mut b = PlanBuilder::new();
        match self {
            Workload::CoinTransfers {
                holders,
                transfers,
                amount,
                property,
                start_balance,
                issue_supply,
                settle_property,
            } => {
                ctx.check_frauds(&[])?;
                let holders = ctx.group(holders)?.to_vec();
                if holders.is_empty() {
                    return Err(ScenarioError::invalid(ctx.line, "holders group is empty".into()));
                }
                for h in &holders {
                    b.plan
                        .balances
                        .push((property.clone(), h.label.clone(), *start_balance));
                }
                if *issue_supply {
                    for (i, h) in holders.iter().enumerate() {
                        let id = ObjectId::sequential(SUPPLY_SEQ_BASE + i as u64);
                        b.create_object(ctx.creation_mode, id, h)?;
                    }
                }
                for i in 0..*transfers {
                    let from = &holders[i as usize % holders.len()];
                    let to = &holders[(i as usize + 1) % holders.len()];
                    b.push(
                        [from.clone(), to.clone()],
                        [],
                        transfer_payload(*amount, from, to, property)?,
                        from,
                    )?;
                    if let Some(mark) = settle_property {
                        let supply =
                            ObjectId::sequential(SUPPLY_SEQ_BASE + (i % holders.len() as u64));
                        b.push(
                            [from.clone()],
                            [supply],
                            assert_payload(mark, Scalar::Bool(true))?,
                            from,
                        )?;
                    }
                }
            }

            Workload::Registry {
                registrars,
                buyers,
                items,
            } => {
                ctx.check_frauds(&["fence-sale", "re-register-stolen"])?;
                let registrars = ctx.group(registrars)?.to_vec();
                let buyers = ctx.group(buyers)?.to_vec();
                if registrars.is_empty() || buyers.is_empty() {
                    return Err(ScenarioError::invalid(
                        ctx.line,
                        "registry needs non-empty registrar and buyer groups".into(),
                    ));
                }
                let item_id = |i: u64| ObjectId::sequential(ITEM_SEQ_BASE + i);
                for i in 0..*items {
                    let reg = &registrars[i as usize % registrars.len()];
                    b.create_object(ctx.creation_mode, item_id(i), reg)?;
                    b.fact(item_id(i), "certified", Scalar::Bool(true));
                }
                for i in 0..*items {
                    let reg = &registrars[i as usize % registrars.len()];
                    let buyer = &buyers[i as usize % buyers.len()];
                    b.push(
                        [reg.clone(), buyer.clone()],
                        [item_id(i)],
                        transfer_payload(1, reg, buyer, "custody")?,
                        reg,
                    )?;
                }
                if ctx.fraud("fence-sale") {
                    // A non-owner tries to sell the first item out from under
                    // its buyer. Holder-of-record checks keep this off the
                    // ledger entirely.
                    if buyers.len() < 4 {
                        return Err(ScenarioError::invalid(
                            ctx.line,
                            "fence-sale needs at least 4 buyers".into(),
                        ));
                    }
                    let thief = &buyers[2];
                    let fence = &buyers[3];
                    b.push(
                        [thief.clone(), fence.clone()],
                        [item_id(0)],
                        transfer_payload(1, thief, fence, "custody")?,
                        thief,
                    )?;
                }
                if ctx.fraud("re-register-stolen") {
                    // The same party registers a stone under a fresh identity
                    // instead. Nothing on the ledger contradicts the record;
                    // only the certification oracle could — and it lies.
                    if buyers.len() < 3 {
                        return Err(ScenarioError::invalid(
                            ctx.line,
                            "re-register-stolen needs at least 3 buyers".into(),
                        ));
                    }
                    let thief = &buyers[2];
                    let id = ObjectId::sequential(ITEM_FRAUD_SEQ);
                    b.push([thief.clone()], [id], create_payload(&id)?, thief)?;
                    b.fact(id, "certified", Scalar::Bool(false));
                    b.lie(id, "certified", Scalar::Bool(true));
                }
            }

            Workload::InsuranceClaims {
                insurers,
                customers,
                claims,
                generic,
            } => {
                ctx.check_frauds(&["duplicate-claim", "undamaged-claim"])?;
                let insurers = ctx.group(insurers)?.to_vec();
                let customers = ctx.group(customers)?.to_vec();
                if insurers.is_empty() || customers.is_empty() {
                    return Err(ScenarioError::invalid(
                        ctx.line,
                        "insurance-claims needs non-empty insurer and customer groups".into(),
                    ));
                }
                let base = if *generic { POLICY_SEQ_BASE } else { LOSS_SEQ_BASE };
                let subject = |i: u64| ObjectId::sequential(base + i);
                for i in 0..*claims {
                    let customer = &customers[i as usize % customers.len()];
                    if *generic {
                        // Pre-agreed policies exist before anyone acts.
                        b.plan
                            .genesis
                            .push(ObjectDescriptor::genesis(subject(i), BTreeMap::new()));
                    } else {
                        // Customers bring their own loss objects.
                        b.create_object(ctx.creation_mode, subject(i), customer)?;
                    }
                    b.fact(subject(i), "damaged", Scalar::Bool(true));
                }
                for i in 0..*claims {
                    let customer = &customers[i as usize % customers.len()];
                    let insurer = &insurers[i as usize % insurers.len()];
                    b.push(
                        [customer.clone(), insurer.clone()],
                        [subject(i)],
                        claim_payload(&subject(i), customer)?,
                        customer,
                    )?;
                }
                if ctx.fraud("duplicate-claim") {
                    // The first claimant files the same claim twice. The
                    // sequence alone refutes it, so it never lands.
                    if *claims == 0 {
                        return Err(ScenarioError::invalid(
                            ctx.line,
                            "duplicate-claim needs at least one claim".into(),
                        ));
                    }
                    let customer = &customers[0];
                    b.push(
                        [customer.clone(), insurers[0].clone()],
                        [subject(0)],
                        claim_payload(&subject(0), customer)?,
                        customer,
                    )?;
                }
                if ctx.fraud("undamaged-claim") {
                    // A claim against a loss that never happened. The ledger
                    // cannot tell; the assessment oracle lies for it.
                    if customers.len() < 7 {
                        return Err(ScenarioError::invalid(
                            ctx.line,
                            "undamaged-claim needs at least 7 customers".into(),
                        ));
                    }
                    let customer = &customers[6];
                    let id = if *generic {
                        let id = ObjectId::sequential(POLICY_SEQ_BASE + claims);
                        b.plan
                            .genesis
                            .push(ObjectDescriptor::genesis(id, BTreeMap::new()));
                        id
                    } else {
                        let id = ObjectId::sequential(LOSS_FRAUD_SEQ);
                        b.create_object(ctx.creation_mode, id, customer)?;
                        id
                    };
                    b.fact(id, "damaged", Scalar::Bool(false));
                    b.lie(id, "damaged", Scalar::Bool(true));
                    b.push(
                        [customer.clone(), insurers[0].clone()],
                        [id],
                        claim_payload(&id, customer)?,
                        customer,
                    )?;
                }
            }

            Workload::MeteredProduction {
                meters,
                lots,
                reading,
            } => {
                ctx.check_frauds(&[])?;
                let meters = ctx.group(meters)?.to_vec();
                if meters.is_empty() {
                    return Err(ScenarioError::invalid(ctx.line, "meters group is empty".into()));
                }
                let lot_id = |i: u64| ObjectId::sequential(LOT_SEQ_BASE + i);
                for i in 0..*lots {
                    let meter = &meters[i as usize % meters.len()];
                    b.create_object(ctx.creation_mode, lot_id(i), meter)?;
                    b.fact(lot_id(i), "kwh", Scalar::Int(*reading));
                }
                for i in 0..*lots {
                    let meter = &meters[i as usize % meters.len()];
                    b.push(
                        [meter.clone()],
                        [lot_id(i)],
                        assert_payload("kwh", Scalar::Int(*reading))?,
                        meter,
                    )?;
                }
            }

            Workload::ChainOfCustody {
                suppliers,
                inspectors,
                goods,
                grade,
                approvals_yes,
                approvals_no,
            } => {
                ctx.check_frauds(&[])?;
                let suppliers = ctx.group(suppliers)?.to_vec();
                let inspectors = ctx.group(inspectors)?.to_vec();
                if suppliers.is_empty() || inspectors.is_empty() {
                    return Err(ScenarioError::invalid(
                        ctx.line,
                        "chain-of-custody needs non-empty supplier and inspector groups".into(),
                    ));
                }
                let good_id = |i: u64| ObjectId::sequential(GOOD_SEQ_BASE + i);
                for i in 0..*goods {
                    let supplier = &suppliers[i as usize % suppliers.len()];
                    b.create_object(ctx.creation_mode, good_id(i), supplier)?;
                    b.fact(good_id(i), "grade", Scalar::str(grade.as_str())?);
                }
                for i in 0..*goods {
                    let inspector = &inspectors[i as usize % inspectors.len()];
                    b.push(
                        [inspector.clone()],
                        [good_id(i)],
                        assert_payload("grade", Scalar::str(grade.as_str())?)?,
                        inspector,
                    )?;
                }
                for i in 0..*goods {
                    let from = &suppliers[i as usize % suppliers.len()];
                    let to = &suppliers[(i as usize + 1) % suppliers.len()];
                    b.push(
                        [from.clone(), to.clone()],
                        [good_id(i)],
                        transfer_payload(1, from, to, "custody")?,
                        from,
                    )?;
                }
                // Release vote: suppliers first, then inspectors, the first
                // `approvals_yes` voting yes and the next `approvals_no` no.
                let voters: Vec<&PartyId> = suppliers.iter().chain(inspectors.iter()).collect();
                let wanted = (approvals_yes + approvals_no) as usize;
                if wanted > voters.len() {
                    return Err(ScenarioError::invalid(
                        ctx.line,
                        format!(
                            "approvals need {wanted} voters but only {} parties exist",
                            voters.len()
                        ),
                    ));
                }
                for (i, voter) in voters.iter().take(wanted).enumerate() {
                    let yes = (i as u64) < *approvals_yes;
                    b.push(
                        [(*voter).clone()],
                        [],
                        assert_payload("approve-goods", Scalar::Bool(yes))?,
                        voter,
                    )?;
                }
            }

            Workload::Shipment {
                carriers,
                containers,
                legs,
            } => {
                ctx.check_frauds(&[])?;
                let carriers = ctx.group(carriers)?.to_vec();
                if carriers.is_empty() {
                    return Err(ScenarioError::invalid(ctx.line, "carriers group is empty".into()));
                }
                if *containers == 0 {
                    return Err(ScenarioError::invalid(
                        ctx.line,
                        "shipment needs at least one container".into(),
                    ));
                }
                let cont_id = |i: u64| ObjectId::sequential(CONTAINER_SEQ_BASE + i);
                // The last container never arrives; its payment request is
                // the one the position oracle is supposed to refuse.
                let delivered = |i: u64| i + 1 < *containers;
                for i in 0..*containers {
                    let carrier = &carriers[i as usize % carriers.len()];
                    b.create_object(ctx.creation_mode, cont_id(i), carrier)?;
                    let position = if delivered(i) { "delivered" } else { "in-transit" };
                    b.fact(cont_id(i), "location", Scalar::str(position)?);
                }
                for i in 0..*containers {
                    let carrier = &carriers[i as usize % carriers.len()];
                    for leg in 1..=*legs {
                        b.push(
                            [carrier.clone()],
                            [cont_id(i)],
                            assert_payload("location", Scalar::str(format!("checkpoint-{leg}"))?)?,
                            carrier,
                        )?;
                    }
                    if delivered(i) {
                        b.push(
                            [carrier.clone()],
                            [cont_id(i)],
                            assert_payload("location", Scalar::str("delivered")?)?,
                            carrier,
                        )?;
                    }
                }
                for i in 0..*containers {
                    let carrier = &carriers[i as usize % carriers.len()];
                    b.push(
                        [carrier.clone()],
                        [cont_id(i)],
                        invoke_payload("delivery-payment")?,
                        carrier,
                    )?;
                }
            }
        }
        Ok(b.plan)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::parse::parse_document;

    fn groups(spec: &[(&str, u64, u64)]) -> BTreeMap<String, Vec<PartyId>> {
        spec.iter()
            .map(|(name, count, start)| {
                let members = (0..*count)
                    .map(|i| {
                        PartyId::new(start + i, format!("{name}-{}", i + 1)).unwrap()
                    })
                    .collect();
                (name.to_string(), members)
            })
            .collect()
    }

    fn ctx<'a>(
        groups: &'a BTreeMap<String, Vec<PartyId>>,
        mode: CreationMode,
        frauds: &'a [(String, usize)],
    ) -> WorkloadContext<'a> {
        WorkloadContext {
            groups,
            creation_mode: mode,
            frauds,
            line: 1,
        }
    }

    fn parse_workload(text: &str) -> Workload {
        let roots = parse_document(text).unwrap();
        Workload::from_node(&roots[0]).unwrap()
    }

    #[test]
    fn workload_nodes_parse_with_defaults() {
        let w = parse_workload(
            "workload coin-transfers {\n holders holder\n transfers 6\n amount 5\n property coin\n}\n",
        );
        assert_eq!(
            w,
            Workload::CoinTransfers {
                holders: "holder".into(),
                transfers: 6,
                amount: 5,
                property: "coin".into(),
                start_balance: 100,
                issue_supply: false,
                settle_property: None,
            }
        );
        let w = parse_workload("workload shipment {\n carriers carrier\n containers 4\n}\n");
        assert_eq!(
            w,
            Workload::Shipment {
                carriers: "carrier".into(),
                containers: 4,
                legs: 2,
            }
        );
    }

    #[test]
    fn unknown_parameters_are_rejected_with_their_line() {
        let roots =
            parse_document("workload registry {\n registrars miner\n buyers customer\n items 3\n typo 1\n}\n")
                .unwrap();
        let err = Workload::from_node(&roots[0]).unwrap_err();
        assert!(err.to_string().contains("line 5"), "{err}");
        assert!(err.to_string().contains("typo"), "{err}");
    }

    #[test]
    fn creation_mode_decides_genesis_versus_create_records() {
        let g = groups(&[("meter", 3, 101)]);
        let w = Workload::MeteredProduction {
            meters: "meter".into(),
            lots: 3,
            reading: 120,
        };
        let consensus = w.generate(&ctx(&g, CreationMode::ConsensusBased, &[])).unwrap();
        assert_eq!(consensus.genesis.len(), 3);
        assert!(consensus
            .schedule
            .iter()
            .all(|p| p.record.payload.kind == PayloadKind::Assert));

        let party = w.generate(&ctx(&g, CreationMode::PartyCreated, &[])).unwrap();
        assert!(party.genesis.is_empty());
        let creates = party
            .schedule
            .iter()
            .filter(|p| p.record.payload.kind == PayloadKind::Create)
            .count();
        assert_eq!(creates, 3);
    }

    #[test]
    fn schedules_are_sorted_with_unique_signatures_and_causal_order() {
        let g = groups(&[("miner", 2, 201), ("customer", 20, 301)]);
        let frauds = vec![
            ("fence-sale".to_string(), 10),
            ("re-register-stolen".to_string(), 11),
        ];
        let w = Workload::Registry {
            registrars: "miner".into(),
            buyers: "customer".into(),
            items: 6,
        };
        let plan = w.generate(&ctx(&g, CreationMode::PartyCreated, &frauds)).unwrap();
        let mut sigs = std::collections::BTreeSet::new();
        let mut prev = 0;
        for p in &plan.schedule {
            assert!(p.available_from >= prev);
            prev = p.available_from;
            assert!(sigs.insert(p.record.signature()), "duplicate signature");
        }
        // Every item's create precedes every record referencing it.
        for (i, p) in plan.schedule.iter().enumerate() {
            if p.record.payload.kind != PayloadKind::Create {
                for obj in &p.record.objects {
                    let created_before = plan.schedule[..i].iter().any(|q| {
                        q.record.payload.kind == PayloadKind::Create
                            && q.record.objects.contains(obj)
                    });
                    assert!(created_before, "record {i} references an uncreated object");
                }
            }
        }
        // The fraud ground truth and the covering lie are both present.
        let fraud_id = ObjectId::sequential(ITEM_FRAUD_SEQ);
        assert!(plan
            .facts
            .contains(&(fraud_id, "certified".to_string(), Scalar::Bool(false))));
        assert!(plan
            .lies
            .contains(&(fraud_id, "certified".to_string(), Scalar::Bool(true))));
    }

    #[test]
    fn unsupported_frauds_point_at_the_enabling_line() {
        let g = groups(&[("holder", 5, 101)]);
        let frauds = vec![("fence-sale".to_string(), 42)];
        let w = Workload::CoinTransfers {
            holders: "holder".into(),
            transfers: 2,
            amount: 1,
            property: "coin".into(),
            start_balance: 10,
            issue_supply: false,
            settle_property: None,
        };
        let err = w.generate(&ctx(&g, CreationMode::ConsensusBased, &frauds)).unwrap_err();
        assert!(err.to_string().contains("line 42"), "{err}");
    }

    #[test]
    fn shipment_keeps_one_container_short_of_arrival() {
        let g = groups(&[("carrier", 3, 101)]);
        let w = Workload::Shipment {
            carriers: "carrier".into(),
            containers: 4,
            legs: 2,
        };
        let plan = w.generate(&ctx(&g, CreationMode::ConsensusBased, &[])).unwrap();
        let delivered = plan
            .facts
            .iter()
            .filter(|(_, p, v)| p == "location" && *v == Scalar::str("delivered").unwrap())
            .count();
        let in_transit = plan
            .facts
            .iter()
            .filter(|(_, p, v)| p == "location" && *v == Scalar::str("in-transit").unwrap())
            .count();
        assert_eq!((delivered, in_transit), (3, 1));
        // Payment is requested for every container, arrived or not.
        let requests = plan
            .schedule
            .iter()
            .filter(|p| p.record.payload.kind == PayloadKind::ContractInvoke)
            .count();
        assert_eq!(requests, 4);
    }
}

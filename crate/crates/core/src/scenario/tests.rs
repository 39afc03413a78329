use super::*;

/// Directory holding the shipped scenario files, resolved relative to this
/// crate so the tests work from any working directory.
fn scenario_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn load(name: &str) -> Scenario {
    let path = scenario_dir().join(format!("{name}.scn"));
    Scenario::load(&path).unwrap_or_else(|e| panic!("loading {name}: {e}"))
}

fn analyze(name: &str) -> ScenarioRunReport {
    run_scenario(&load(name), &RunOptions::analysis())
        .unwrap_or_else(|e| panic!("analyzing {name}: {e}"))
}

fn goal<'a>(report: &'a ScenarioRunReport, name: &str) -> &'a GoalOutcome {
    report
        .goals
        .iter()
        .find(|g| g.name == name)
        .unwrap_or_else(|| panic!("{}: no goal named {name}", report.scenario))
}

const ALL_SCENARIOS: [&str; 8] = [
    "virtual-currency",
    "diamond-notary",
    "inter-bank-settlement",
    "insurance-specific",
    "insurance-generic",
    "energy-trading",
    "supply-chain",
    "location-tracking",
];

#[test]
fn every_shipped_scenario_parses_and_matches_its_filename() {
    for name in ALL_SCENARIOS {
        let scenario = load(name);
        assert_eq!(scenario.name, name);
        assert!(!scenario.description.is_empty(), "{name}: empty description");
        assert!(!scenario.groups.is_empty(), "{name}: no party groups");
        assert!(!scenario.schedule.is_empty(), "{name}: empty schedule");
        // Every shipped file commits to a full verdict up front.
        let exp = &scenario.expected;
        assert!(exp.object_creation_met.is_some(), "{name}: no object-creation expectation");
        assert!(exp.internal_predicate_met.is_some(), "{name}: no internal-predicate expectation");
        assert!(
            exp.replaces_trusted_third_party.is_some(),
            "{name}: no replaces-trusted-third-party expectation"
        );
        assert!(!exp.goals.is_empty(), "{name}: no goal expectations");
        for g in &exp.goals {
            assert!(
                scenario.goals.iter().any(|d| d.name == g.name),
                "{name}: expectation for undeclared goal {}",
                g.name
            );
        }
    }
}

#[test]
fn golden_verdict_matrix_holds_under_analysis() {
    for name in ALL_SCENARIOS {
        let scenario = load(name);
        let report = run_scenario(&scenario, &RunOptions::analysis())
            .unwrap_or_else(|e| panic!("{name}: {e}"));
        let exp = &scenario.expected;

        assert_eq!(
            report.audit.object_creation.met,
            exp.object_creation_met.unwrap(),
            "{name}: object-creation criterion"
        );
        assert_eq!(
            report.audit.internal_predicate.met,
            exp.internal_predicate_met.unwrap(),
            "{name}: internal-predicate criterion"
        );
        assert_eq!(
            report.audit.replaces_trusted_third_party,
            exp.replaces_trusted_third_party.unwrap(),
            "{name}: headline verdict"
        );
        // The headline is the conjunction of the two criteria, always.
        assert_eq!(
            report.audit.replaces_trusted_third_party,
            report.audit.trusted.is_empty(),
            "{name}: trusted set must be empty exactly when the ledger replaces the third party"
        );

        for g in &exp.goals {
            let outcome = goal(&report, &g.name);
            assert_eq!(outcome.ledger, g.ledger, "{name}: goal {} ledger verdict", g.name);
            if let Some(divergent) = g.divergent {
                assert_eq!(
                    outcome.divergent, divergent,
                    "{name}: goal {} divergence",
                    g.name
                );
            }
        }

        // The ideal-ledger baseline must be a healthy consensus run.
        let consensus = report.consensus.as_ref().expect("analysis runs consensus");
        assert!(consensus.agreement_ok(), "{name}: agreement violated");
        assert!(consensus.validity_ok(), "{name}: validity violated");
        assert!(consensus.termination_ok(), "{name}: run stalled or left work behind");
    }
}

#[test]
fn baseline_validation_flags_only_the_refused_payment() {
    // Seven scenarios decide to a fully valid ledger: inclusion-time checks
    // drop what internal rules forbid, and the declared (lying) oracles wave
    // the remaining fraud through. Location-tracking is the exception by
    // design: its last container never arrives, the payment request for it
    // is recorded anyway, and post-hoc validation correctly refuses it.
    for name in ALL_SCENARIOS {
        let report = analyze(name);
        if name == "location-tracking" {
            assert_eq!(report.validation.violations(), 1, "{name}: exactly one refused record");
        } else {
            assert!(
                report.validation.all_valid(),
                "{name}: unexpected invalid records at {:?}",
                report.validation.invalid_indices()
            );
        }
    }
}

#[test]
fn virtual_currency_mints_follow_approved_spends() {
    let scenario = load("virtual-currency");
    let report = run_scenario(&scenario, &RunOptions::analysis()).unwrap();

    // One mint per approved transfer; protocol output never re-triggers.
    let transfers = scenario.schedule.len() as u64;
    assert_eq!(report.hook_firings.len() as u64, transfers);
    let decided = report.consensus.as_ref().unwrap().decided.len();
    assert_eq!(report.extended.len() as u64, decided as u64 + transfers);

    // Hook-emitted records carry the system proposer, so the audit sees no
    // party vouching for anything and keeps the trusted set empty.
    assert!(report.consulted.is_empty());
    assert!(report.audit.trusted.is_empty());
    let minted = report
        .extended
        .iter()
        .filter(|r| r.payload.kind == PayloadKind::Create && r.proposer.is_system())
        .count() as u64;
    // Genesis coin plus one mint per transfer.
    assert_eq!(minted, transfers + 1);
}

#[test]
fn inter_bank_binding_reclassifies_the_settlement_predicate() {
    let report = analyze("inter-bank-settlement");
    let settlement = report
        .bound_predicates
        .iter()
        .find(|d| d.name == "settlement-finality")
        .expect("settlement predicate survives binding");
    assert_eq!(settlement.dependency, Dependency::Internal);
    assert!(settlement.oracle.is_none());

    // With the settled flag bound to ledger contents, nothing consults the
    // correspondent network at all.
    assert_eq!(report.consulted.values().sum::<u64>(), 0);
    let outcome = goal(&report, "settled-on-ledger");
    assert_eq!(outcome.dependency, Dependency::Internal);
    assert!(outcome.world_truth.is_none());
    assert!(!outcome.divergent);

    // Banks still vouch for off-ledger reserves, so the audit keeps them in
    // the trusted set even though every predicate became internal.
    assert!(report.audit.internal_predicate.met);
    assert!(!report.audit.object_creation.met);
    assert!(!report.audit.trusted.is_empty());
}

#[test]
fn diamond_custody_fraud_dies_at_inclusion_but_registration_fraud_lands() {
    let scenario = load("diamond-notary");
    let report = run_scenario(&scenario, &RunOptions::analysis()).unwrap();
    let consensus = report.consensus.as_ref().unwrap();

    // The fence's resale of a stone it no longer holds breaks the custody
    // chain, an internal record-scoped rule, so consensus never includes it
    // — and dropping it is correct, not a liveness failure.
    assert_eq!(consensus.decided.len() + 1, scenario.schedule.len());
    assert_eq!(consensus.termination.unincluded_valid, 0);

    // The re-registration of the stolen stone is a fresh identifier backed
    // by a lying certifier: internally unimpeachable, so it lands.
    let creates = consensus
        .decided
        .iter()
        .filter(|r| r.payload.kind == PayloadKind::Create)
        .count();
    assert_eq!(creates, 7, "six honest registrations plus the forged one");

    // The gemologist certified it genuine; forced-truthful oracles disagree.
    let outcome = goal(&report, "registered-stones-certified");
    assert!(outcome.ledger);
    assert_eq!(outcome.world_truth, Some(false));
    assert!(outcome.divergent);
}

#[test]
fn insurance_variants_split_on_creation_mode_alone() {
    let specific = analyze("insurance-specific");
    let generic = analyze("insurance-generic");

    // Same rules, same oracle, same fraud surface for assessments — the only
    // difference is who brings the insured objects into existence.
    assert!(!specific.audit.object_creation.met);
    assert!(generic.audit.object_creation.met);
    assert!(!specific.audit.internal_predicate.met);
    assert!(!generic.audit.internal_predicate.met);

    for report in [&specific, &generic] {
        let assessed = goal(report, "claims-damage-backed");
        assert!(assessed.ledger, "{}: lying assessor approves the claim", report.scenario);
        assert_eq!(assessed.world_truth, Some(false), "{}", report.scenario);
        assert!(assessed.divergent, "{}", report.scenario);

        let dedup = goal(report, "no-duplicate-settlements");
        assert!(dedup.ledger, "{}: duplicate filtering holds", report.scenario);
        assert!(!dedup.divergent, "{}: internal goals cannot diverge", report.scenario);
    }

    // The double claim is refused at inclusion, not merely flagged later.
    let scenario = load("insurance-specific");
    let consensus = specific.consensus.as_ref().unwrap();
    assert_eq!(consensus.decided.len() + 1, scenario.schedule.len());
    assert_eq!(consensus.termination.unincluded_valid, 0);
}

#[test]
fn creation_mode_flips_only_when_declared_configurable() {
    let supply = load("supply-chain");
    assert_eq!(supply.creation_mode, CreationMode::ConsensusBased);

    // Same mode: a plain copy.
    let same = supply.with_creation_mode(CreationMode::ConsensusBased).unwrap();
    assert_eq!(same.schedule.len(), supply.schedule.len());
    assert_eq!(same.world.genesis.len(), supply.world.genesis.len());

    // Flipped: goods leave the genesis set and enter the schedule as
    // party-proposed registrations.
    let flipped = supply.with_creation_mode(CreationMode::PartyCreated).unwrap();
    assert_eq!(flipped.creation_mode, CreationMode::PartyCreated);
    assert!(flipped.world.genesis.len() < supply.world.genesis.len());
    assert!(flipped.schedule.len() > supply.schedule.len());

    // And the audit notices: party-created objects cost the first criterion.
    let report = run_scenario(&flipped, &RunOptions::analysis()).unwrap();
    assert!(!report.audit.object_creation.met);
    assert!(!report.audit.replaces_trusted_third_party);

    // A pinned scenario refuses the flip outright.
    let pinned = load("virtual-currency");
    let err = pinned.with_creation_mode(CreationMode::PartyCreated).unwrap_err();
    assert!(matches!(err, ScenarioError::Unsupported(_)), "got {err}");
    assert!(err.to_string().contains("pins its creation mode"));
}

#[test]
fn zero_rounds_evaluates_genesis_alone() {
    let scenario = load("supply-chain");
    let options = RunOptions {
        rounds: Some(0),
        ..RunOptions::analysis()
    };
    let report = run_scenario(&scenario, &options).unwrap();

    assert!(report.consensus.is_none());
    assert_eq!(report.extended.len(), scenario.world.genesis.len());
    assert!(report.hook_firings.is_empty());

    // No asserts were recorded: the grading goal constrains nothing and
    // passes vacuously; the vote threshold has no ballots and fails.
    let graded = goal(&report, "goods-graded");
    assert!(graded.ledger);
    assert_eq!(graded.records_checked, 0);
    let approved = goal(&report, "release-approved");
    assert!(!approved.ledger);
    assert_eq!(approved.records_checked, report.extended.len() as u64);

    // Declaring an external rule is enough to fail the second criterion
    // even before anything consults the oracle.
    assert_eq!(report.consulted.get("assay-lab"), Some(&0));
    assert!(!report.audit.internal_predicate.met);
}

#[test]
fn parse_rejects_inconsistent_declarations() {
    // Two roots.
    let err = Scenario::parse(
        "scenario a {\n  creation consensus-based\n}\nscenario b {\n  creation consensus-based\n}\n",
    )
    .unwrap_err();
    assert!(err.to_string().contains("exactly one top-level `scenario` block"), "got {err}");

    // A predicate consulting an oracle nobody declared.
    let err = Scenario::parse(
        "scenario a {\n\
         \tcreation consensus-based\n\
         \tparties {\n\t\tgroup bank count 2 start-id 101\n\t}\n\
         \tpredicates {\n\t\tpredicate checked external nobody property-equals certified true\n\t}\n\
         }\n",
    )
    .unwrap_err();
    assert!(
        err.to_string().contains("consults undeclared oracle `nobody`"),
        "got {err}"
    );
    assert!(err.to_string().starts_with("line 7"), "got {err}");

    // Duplicate names across predicates and goals.
    let err = Scenario::parse(
        "scenario a {\n\
         \tcreation consensus-based\n\
         \tparties {\n\t\tgroup bank count 2 start-id 101\n\t}\n\
         \tpredicates {\n\t\tpredicate checked internal always\n\t}\n\
         \tgoals {\n\t\tgoal checked internal always\n\t}\n\
         }\n",
    )
    .unwrap_err();
    assert!(err.to_string().contains("`checked` declared twice"), "got {err}");

    // A hook firing on a predicate that does not exist.
    let err = Scenario::parse(
        "scenario a {\n\
         \tcreation consensus-based\n\
         \tparties {\n\t\tgroup bank count 2 start-id 101\n\t}\n\
         \thooks {\n\t\thook mint on approval create-object {\n\t\t\tattribute unit coin\n\t\t}\n\t}\n\
         }\n",
    )
    .unwrap_err();
    assert!(
        err.to_string().contains("hook `mint` triggers on unknown predicate `approval`"),
        "got {err}"
    );

    // A fraud with no workload to host it.
    let err = Scenario::parse(
        "scenario a {\n\
         \tcreation consensus-based\n\
         \tparties {\n\t\tgroup bank count 2 start-id 101\n\t}\n\
         \tadversaries {\n\t\tfraud fence-sale\n\t}\n\
         }\n",
    )
    .unwrap_err();
    assert!(
        err.to_string().contains("fraud `fence-sale` declared but the scenario has no workload"),
        "got {err}"
    );
}

#[test]
fn a_minimal_workloadless_scenario_runs() {
    let scenario = Scenario::parse(
        "scenario tiny {\n\
         \tdescription \"nothing but a genesis object\"\n\
         \tcreation consensus-based\n\
         \tparties {\n\t\tgroup watcher count 1 start-id 101\n\t}\n\
         \tworld {\n\t\tgenesis-object seq:1 unit coin\n\t}\n\
         \tgoals {\n\t\tgoal anything internal always\n\t}\n\
         }\n",
    )
    .unwrap();
    assert!(scenario.schedule.is_empty());

    let report = run_scenario(&scenario, &RunOptions::analysis()).unwrap();
    assert_eq!(report.extended.len(), 1);
    assert!(goal(&report, "anything").ledger);
    assert!(report.audit.replaces_trusted_third_party);
}

#[test]
fn premature_creation_needs_party_chosen_identifiers() {
    let diamond = load("diamond-notary");

    // Any head start wins when identifiers are sequential public knowledge.
    let won = premature_creation_attack(&diamond, IdScheme::Sequential, 3, 40, DEFAULT_SEED).unwrap();
    assert_eq!((won.trials, won.successes), (40, 40));
    assert!((won.success_rate - 1.0).abs() < f64::EPSILON);

    // No head start, no race.
    let level = premature_creation_attack(&diamond, IdScheme::Sequential, 0, 40, DEFAULT_SEED).unwrap();
    assert_eq!(level.successes, 0);

    // Wider random identifiers shrink the attacker's odds monotonically.
    let mut last = u64::MAX;
    for width in [4u16, 8, 16] {
        let out = premature_creation_attack(
            &diamond,
            IdScheme::RandomBits { width },
            3,
            4_000,
            DEFAULT_SEED,
        )
        .unwrap();
        assert!(
            out.successes <= last,
            "width {width}: {} successes after {last}",
            out.successes
        );
        last = out.successes;
    }

    let narrow = premature_creation_attack(
        &diamond,
        IdScheme::RandomBits { width: 4 },
        3,
        4_000,
        DEFAULT_SEED,
    )
    .unwrap();
    assert!(narrow.successes > 0, "a 4-bit identifier is guessable in 4000 tries");

    let wide = premature_creation_attack(
        &diamond,
        IdScheme::RandomBits { width: 128 },
        3,
        500,
        DEFAULT_SEED,
    )
    .unwrap();
    assert_eq!(wide.successes, 0, "128 bits is beyond guessing");

    // Consensus-created objects have no party-chosen identifier to race.
    let minted = load("virtual-currency");
    let err =
        premature_creation_attack(&minted, IdScheme::Sequential, 3, 10, DEFAULT_SEED).unwrap_err();
    assert!(matches!(err, ScenarioError::InapplicableAttack { .. }), "got {err}");
}

#[test]
fn sybil_ballots_only_sway_open_membership() {
    let supply = load("supply-chain");

    // Closed membership never admits the forged identities.
    let err = sybil_vote_attack(&supply, EngineKind::PermissionedQuorum, 10, 11, DEFAULT_SEED)
        .unwrap_err();
    assert!(matches!(err, ScenarioError::InapplicableAttack { .. }), "got {err}");

    // Open membership: 11 forged approvals of 21 ballots clears a strictly-
    // above-one-half threshold (needs 11)...
    let swung = sybil_vote_attack(&supply, EngineKind::PermissionlessChain, 10, 11, DEFAULT_SEED)
        .unwrap();
    assert_eq!((swung.trials, swung.successes), (1, 1));
    assert!(swung.detail.contains("11 of 21"), "got {}", swung.detail);

    // ...while 5 of 15 falls short (needs 8).
    let held = sybil_vote_attack(&supply, EngineKind::PermissionlessChain, 10, 5, DEFAULT_SEED)
        .unwrap();
    assert_eq!(held.successes, 0);
    assert!(held.detail.contains("8 of 15"), "got {}", held.detail);

    // No vote-threshold rule, nothing to out-vote.
    let minted = load("virtual-currency");
    let err = sybil_vote_attack(&minted, EngineKind::PermissionlessChain, 10, 11, DEFAULT_SEED)
        .unwrap_err();
    assert!(matches!(err, ScenarioError::InapplicableAttack { .. }), "got {err}");
}

#[test]
fn corrupted_oracles_split_ledger_from_world() {
    // Fully internal after ledger-binding: nothing to corrupt.
    let interbank = load("inter-bank-settlement");
    let err = lying_oracle_attack(
        &interbank,
        &interbank.attack_presets,
        EngineKind::PermissionedQuorum,
        None,
        DEFAULT_SEED,
    )
    .unwrap_err();
    assert!(matches!(err, ScenarioError::InapplicableAttack { .. }), "got {err}");

    // A meter reader reporting double the recorded production makes the
    // ledger reject a true reading: ledger false, world true.
    let energy = load("energy-trading");
    assert!(!energy.attack_presets.is_empty());
    let report = lying_oracle_attack(
        &energy,
        &energy.attack_presets,
        EngineKind::PermissionedQuorum,
        None,
        DEFAULT_SEED,
    )
    .unwrap();
    assert_eq!(report.diverged, vec!["readings-match-meters".to_string()]);
    let metered = &report.goals[0];
    assert!(!metered.ledger);
    assert_eq!(metered.world_truth, Some(true));

    // A GPS feed claiming the last container arrived makes the ledger pay
    // for an undelivered shipment: ledger true, world false.
    let freight = load("location-tracking");
    let report = lying_oracle_attack(
        &freight,
        &freight.attack_presets,
        EngineKind::PermissionedQuorum,
        None,
        DEFAULT_SEED,
    )
    .unwrap();
    assert_eq!(report.diverged, vec!["paid-only-on-arrival".to_string()]);
    let paid = report
        .goals
        .iter()
        .find(|g| g.name == "paid-only-on-arrival")
        .unwrap();
    assert!(paid.ledger);
    assert_eq!(paid.world_truth, Some(false));

    // Internal goals never enter the divergence set.
    let supply = load("supply-chain");
    let report = lying_oracle_attack(
        &supply,
        &supply.attack_presets,
        EngineKind::PermissionedQuorum,
        None,
        DEFAULT_SEED,
    )
    .unwrap();
    assert_eq!(report.diverged, vec!["goods-graded".to_string()]);

    // No overrides: the corrupted run is just the baseline, no divergence.
    let report = lying_oracle_attack(&energy, &[], EngineKind::PermissionedQuorum, None, DEFAULT_SEED)
        .unwrap();
    assert!(report.diverged.is_empty());
}

#[test]
fn reports_are_reproducible_for_a_fixed_seed() {
    let scenario = load("supply-chain");
    let options = RunOptions {
        engine: EngineKind::PermissionlessChain,
        ..RunOptions::default()
    };
    let a = run_scenario(&scenario, &options).unwrap();
    let b = run_scenario(&scenario, &options).unwrap();

    let log_a = &a.consensus.as_ref().unwrap().log;
    let log_b = &b.consensus.as_ref().unwrap().log;
    assert_eq!(log_a, log_b);
    assert_eq!(
        a.extended.iter().collect::<Vec<_>>(),
        b.extended.iter().collect::<Vec<_>>()
    );
    for (ga, gb) in a.goals.iter().zip(&b.goals) {
        assert_eq!((ga.ledger, ga.divergent), (gb.ledger, gb.divergent), "{}", ga.name);
    }

    // A different seed steers the probabilistic engine elsewhere.
    let other = run_scenario(
        &scenario,
        &RunOptions {
            seed: DEFAULT_SEED + 1,
            ..options
        },
    )
    .unwrap();
    assert_ne!(log_a, &other.consensus.as_ref().unwrap().log);
}

#[test]
fn find_resolves_names_through_the_scenario_dir() {
    // Explicit path, no environment needed.
    let direct = Scenario::find(
        scenario_dir().join("diamond-notary.scn").to_str().unwrap(),
    )
    .unwrap();
    assert_eq!(direct.name, "diamond-notary");

    // Bare name through the scenario-dir variable, extension added for free.
    std::env::set_var("LEDGERLAB_SCENARIO_DIR", scenario_dir());
    let found = Scenario::find("energy-trading");
    std::env::remove_var("LEDGERLAB_SCENARIO_DIR");
    assert_eq!(found.unwrap().name, "energy-trading");

    // A miss names every location that was tried.
    let err = Scenario::find("no-such-scenario").unwrap_err();
    let text = err.to_string();
    assert!(text.contains("scenario not found"), "got {text}");
    assert!(text.contains("no-such-scenario.scn"), "got {text}");
}

use proptest::prelude::*;
use spbp::commodity::CommoditySelection;
use spbp::engine::{run, RadioConfig, Scenario, Simulation, SimulationParams, TrafficConfig, Variant};
use spbp::scheduler::SchedulerKind;
use spbp::topology::AntennaMode;

fn scheduler() -> impl Strategy<Value = SchedulerKind> {
    prop_oneof![
        Just(SchedulerKind::Lgs),
        Just(SchedulerKind::LgsAch),
        Just(SchedulerKind::LgsMimo)
    ]
}

fn selection() -> impl Strategy<Value = CommoditySelection> {
    prop_oneof![Just(CommoditySelection::Exclusive), Just(CommoditySelection::MaxU)]
}

fn params(horizon: usize) -> SimulationParams {
    SimulationParams {
        horizon,
        ..SimulationParams::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn packets_are_conserved_and_trips_respect_hop_distance(
        n in 8usize..20,
        seed in any::<u64>(),
        kind in scheduler(),
        sel in selection(),
        decouple in any::<bool>(),
        siso in any::<bool>(),
    ) {
        let radio = RadioConfig::default();
        let traffic = TrafficConfig { lambda: Some(1.5), ..TrafficConfig::default() };
        let scenario = Scenario::generate(n, seed, seed ^ 1, &radio, &traffic, 120).unwrap();
        let variant = Variant {
            decouple: decouple && kind != SchedulerKind::Lgs,
            antennas: siso.then_some(AntennaMode::Siso),
            ..Variant::new(sel, kind)
        };
        let mut sim = Simulation::new(&scenario, &variant, &radio, params(120)).unwrap();
        while !sim.is_done() {
            sim.step().unwrap();
            let st = sim.state();
            let queued: u32 = st.queues().sum();
            prop_assert_eq!(st.injected(), st.delivered() + queued as usize);
            prop_assert_eq!(st.in_flight(), queued as usize);
        }
        let g = &scenario.graph;
        for p in sim.state().packets() {
            if let Some(latency) = p.latency() {
                let hops = g.hop_distances(p.src)[p.destination].unwrap();
                prop_assert!(p.hops as usize >= hops);
                prop_assert!(latency >= p.hops as usize);
            }
        }
    }

    #[test]
    fn runs_are_deterministic(n in 8usize..16, seed in any::<u64>(), kind in scheduler(), sel in selection()) {
        let radio = RadioConfig::default();
        let traffic = TrafficConfig::default();
        let scenario = Scenario::generate(n, seed, seed.wrapping_add(7), &radio, &traffic, 100).unwrap();
        let variant = Variant { decouple: kind != SchedulerKind::Lgs, ..Variant::new(sel, kind) };
        let a = run(&scenario, &variant, &radio, params(100)).unwrap();
        let b = run(&scenario, &variant, &radio, params(100)).unwrap();
        prop_assert_eq!(a.metrics, b.metrics);
        prop_assert_eq!(a.delivered, b.delivered);
    }
}

#[test]
fn trace_records_decisions_when_enabled() {
    let radio = RadioConfig::default();
    let scenario = Scenario::generate(10, 1, 2, &radio, &TrafficConfig::default(), 30).unwrap();
    let variant = Variant::new(CommoditySelection::MaxU, SchedulerKind::LgsMimo);
    let p = SimulationParams {
        trace: true,
        ..params(30)
    };
    let out = run(&scenario, &variant, &radio, p).unwrap();
    let trace = out.trace.unwrap();
    assert!(!trace.is_empty());
    for line in trace.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v["slot"].as_u64().unwrap() < 30);
        assert!(["request", "grant", "reject", "schedule", "mute"].contains(&v["action"].as_str().unwrap()));
    }
}

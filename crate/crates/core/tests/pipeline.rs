use rocover::baselines::{exact_opt, OptLimits};
use rocover::generators::{generate, GeneratorSpec};
use rocover::harness::{batched_run, run_trials, Algorithm, BatchedAlgorithm, BetaMode};
use rocover::io::{format_instance, parse_instance, AnyInstance};

fn spec(family: &str, params: &[(&str, &str)]) -> GeneratorSpec {
    let owned: Vec<(String, String)> = params.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
    GeneratorSpec::from_params(family, &owned).unwrap()
}

#[test]
fn every_family_survives_a_file_round_trip() {
    for s in [
        spec("planted", &[("n", "40"), ("k", "4")]),
        spec("upper-triangular", &[("n", "32")]),
        spec("recursive", &[("levels", "3")]),
        spec("binomial", &[("r", "2")]),
        spec("product-batched", &[("n", "4")]),
    ] {
        let g = generate(&s, 5).unwrap();
        let back = parse_instance(&format_instance(&g.instance)).unwrap();
        assert_eq!(back, g.instance, "{}", s.family());
        assert!(g.meta.opt_upper_bound().is_some());
    }
}

#[test]
fn online_algorithms_never_beat_the_certified_optimum() {
    let g = generate(&spec("planted", &[("n", "30"), ("m", "14"), ("k", "3")]), 8).unwrap();
    let opt = exact_opt(g.set_system(), OptLimits::default()).unwrap();
    assert!(opt.exact);
    for alg in ["loc", "unit-loc", "simple-loc:3", "naive", "bn-online", "cip"] {
        let alg: Algorithm = alg.parse().unwrap();
        let stats = run_trials(alg, &g.instance, "p", 30, 4, BetaMode::KnownOpt, Some(opt.cost)).unwrap();
        assert!(stats.min >= opt.cost - 1e-9, "{alg}: {}", stats.min);
    }
    let gd = run_trials(Algorithm::LearnOrCover, &g.instance, "p", 30, 4, BetaMode::GuessDouble, None).unwrap();
    assert!(gd.min >= opt.cost - 1e-9);
    assert_eq!(gd.opt, Some(opt.cost));
}

#[test]
fn batched_costs_sit_above_the_offline_optimum() {
    let g = generate(&spec("product-batched", &[("n", "16")]), 3).unwrap();
    let AnyInstance::Batched(inst) = &g.instance else { panic!("expected a batched instance") };
    let opt = g.meta.opt_upper_bound().unwrap();
    for alg in [BatchedAlgorithm::LocPerElement, BatchedAlgorithm::GreedyPerBatch, BatchedAlgorithm::Naive] {
        let s = batched_run(alg, inst, 40, 1, BetaMode::KnownOpt, opt, 4).unwrap();
        assert!(s.stats.mean >= s.lower_bound * 0.5, "{}: {}", alg.name(), s.stats.mean);
        assert_eq!(s.stats.costs.len(), 40);
    }
}

#[test]
fn empty_ground_set_costs_nothing() {
    let sys = rocover::SetSystem::new(0, vec![vec![]], vec![1.0]).unwrap();
    let inst = AnyInstance::SetCover(sys);
    for alg in ["loc", "unit-loc", "naive", "bn-online", "cip", "greedy"] {
        let stats = run_trials(alg.parse().unwrap(), &inst, "empty", 3, 1, BetaMode::Fixed(1.0), Some(0.0)).unwrap();
        assert_eq!(stats.mean, 0.0, "{alg}");
    }
    let gd = run_trials(Algorithm::LearnOrCover, &inst, "empty", 2, 1, BetaMode::GuessDouble, None).unwrap();
    assert_eq!(gd.mean, 0.0);
    assert!(rocover::SetSystem::new(2, vec![], vec![]).is_err());
}

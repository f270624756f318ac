use cicsec::channels::CicChannel;
use cicsec::codesim::{build_codebooks, simulate, symbol_frequencies, target_bound, SimConfig, SimError};
use cicsec::formats::{parse_channel, parse_dist};

fn fixture(name: &str) -> String {
    std::fs::read_to_string(format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

fn cfg(chan: &str, dist: &str, n: usize, rates: (f64, f64, f64), rt: f64, trials: usize, draws: usize) -> SimConfig {
    SimConfig {
        n,
        r1: rates.0,
        r21: rates.1,
        r22: rates.2,
        rt,
        trials,
        draws,
        seed: 7,
        dist: parse_dist(&fixture(dist)).unwrap(),
        ch: parse_channel(&fixture(chan)).unwrap(),
    }
}

const MASSES: [f64; 8] = [0.1, 0.2, 0.05, 0.15, 0.2, 0.1, 0.12, 0.08];

#[test]
fn codeword_symbols_follow_the_input_law() {
    let text = format!(
        "var U 2\nvar X1 2\nvar X2 2\np {} {}\np {} {}\np {} {}\np {} {}\n",
        MASSES[0], MASSES[1], MASSES[2], MASSES[3], MASSES[4], MASSES[5], MASSES[6], MASSES[7]
    );
    let ch = CicChannel::from_fn(2, 2, 2, 2, |_, _, _, _| 0.25).unwrap();
    let mut c = SimConfig {
        n: 250,
        r1: 0.0,
        r21: 0.0,
        r22: 0.0,
        rt: 0.0,
        trials: 0,
        draws: 1,
        seed: 11,
        dist: parse_dist(&text).unwrap(),
        ch,
    };
    let mut freq = vec![0u64; 8];
    for d in 0..40 {
        c.seed = 100 + d;
        let ens = build_codebooks(&c, c.seed).unwrap();
        for (f, g) in freq.iter_mut().zip(symbol_frequencies(&ens, 2)) {
            *f += g;
        }
    }
    let total: u64 = freq.iter().sum();
    assert_eq!(total, 250 * 40);
    for (k, (&f, &p)) in freq.iter().zip(&MASSES).enumerate() {
        let sigma = (total as f64 * p * (1.0 - p)).sqrt();
        let dev = (f as f64 - total as f64 * p).abs();
        assert!(dev <= 3.0 * sigma, "cell {k}: {f} vs {} (3 sigma {})", total as f64 * p, 3.0 * sigma);
    }
}

#[test]
fn common_rate_above_receiver1_capacity_keeps_errors() {
    // Y = X1 through a BSC(0.2), capacity about 0.278; Z = X2.
    let ch = CicChannel::from_fn(2, 2, 2, 2, |a, b, y, z| {
        let py = if y == a { 0.8 } else { 0.2 };
        if z == b { py } else { 0.0 }
    })
    .unwrap();
    let text = "var U 1\nvar X1 2\nvar X2 2\np 0.25 0.25\np 0.25 0.25\n";
    for n in [2, 4, 6, 8] {
        let c = SimConfig {
            n,
            r1: 0.5,
            r21: 0.0,
            r22: 0.0,
            rt: 0.0,
            trials: 4000,
            draws: 40,
            seed: 3,
            dist: parse_dist(text).unwrap(),
            ch: ch.clone(),
        };
        let r = simulate(&c, false).unwrap();
        assert!(r.pe_rx1 > 0.2, "n = {n}: receiver-1 error {}", r.pe_rx1);
    }
}

#[test]
fn zero_rates_give_no_error_and_no_equivocation() {
    let r = simulate(&cfg("binary.chan", "binary.dist", 4, (0.0, 0.0, 0.0), 0.0, 500, 3), true).unwrap();
    assert_eq!(r.pe, 0.0);
    assert_eq!(r.equivocation, 0.0);
}

#[test]
fn public_confidential_layer_leaks_to_receiver1() {
    let r = simulate(&cfg("binary.chan", "binary.dist", 8, (0.0, 0.5, 0.0), 0.0, 0, 20), true).unwrap();
    assert!(r.equivocation <= 0.05, "equivocation {}", r.equivocation);
}

#[test]
fn equivocation_rises_toward_the_target_on_the_quaternary_wiretap() {
    let mut prev = 0.0;
    for n in [2, 4, 6, 8] {
        let c = cfg("wiretap4.chan", "wiretap4.dist", n, (0.0, 0.0, 0.5), 0.5, 0, 50);
        let e = simulate(&c, true).unwrap().equivocation;
        let target = target_bound(&c).unwrap();
        assert!(e >= prev, "n = {n}: {e} < {prev}");
        assert!(e <= target + 1e-9, "n = {n}: {e} above target {target}");
        prev = e;
    }
}

#[test]
fn runs_are_reproducible() {
    let c = cfg("binary.chan", "binary.dist", 6, (0.0, 0.0, 0.5), 0.0, 3000, 30);
    let a = simulate(&c, true).unwrap();
    let b = simulate(&c, true).unwrap();
    assert_eq!(a, b);
    let mut d = c.clone();
    d.seed += 1;
    assert_ne!(simulate(&d, true).unwrap(), a);
}

#[test]
fn enumeration_cap_is_enforced() {
    let c = cfg("wiretap4.chan", "wiretap4.dist", 12, (0.0, 0.5, 1.0), 0.5, 0, 1);
    match simulate(&c, true) {
        Err(e @ SimError::EnumerationCap { .. }) => assert!(e.to_string().contains("2^26")),
        other => panic!("expected the enumeration cap, got {other:?}"),
    }
}

#[test]
fn fractional_message_counts_are_rejected() {
    let c = cfg("binary.chan", "binary.dist", 3, (0.0, 0.5, 0.0), 0.0, 10, 1);
    assert!(matches!(simulate(&c, false), Err(SimError::NonIntegralCount { .. })));
}

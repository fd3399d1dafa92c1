//! End-to-end acceptance suite. Each criterion prints a single PASS/FAIL
//! line (run with `--nocapture` to see them on success); the test fails if
//! any criterion fails.

use gshift_core::capacity::{
    build_truncated_channel, maximize_capacity, mi_gradient, normalized_mi, AscentOptions,
    InputDistribution,
};
use gshift_core::channel::{QuantizationScheme, RunSequence};
use gshift_core::codes::{decode, decode_bits, encode, verify_roundtrip, CodeId};
use gshift_core::fer::{predict_fer_asymptotic, run_fer, SimConfig};
use gshift_core::metrics::{
    power_report, rll_capacity, rll_capacity_powers_of_three, RllConstraint,
};
use gshift_core::rng::substream;
use rand_core::RngCore;

type Outcome = Result<String, String>;

fn rational(n: i64, d: i64) -> num_rational::Ratio<i64> {
    num_rational::Ratio::new(n, d)
}

/// Criterion 1: published constraint capacities and the powers-of-3 family.
fn criterion_1() -> Outcome {
    let cases: &[(&[u32], &[u32], f64)] = &[
        (&[1, 2], &[1, 2], 0.694),
        (&[1], &[1, 2], 0.406),
        (&[1, 3], &[1, 3], 0.552),
        (&[1], &[1, 3], 0.347),
        (&[1, 2, 4], &[1, 2, 4], 0.811),
        (&[1, 2], &[1, 2, 4], 0.758),
        (&[1], &[1, 2, 4], 0.515),
    ];
    for &(z, o, want) in cases {
        let c = RllConstraint::new(z.to_vec(), o.to_vec()).map_err(|e| e.to_string())?;
        let got = rll_capacity(&c).map_err(|e| e.to_string())?;
        if (got - want).abs() > 1e-3 {
            return Err(format!("capacity of ({z:?},{o:?}) = {got}, expected {want}"));
        }
    }
    let fam = rll_capacity_powers_of_three(4).map_err(|e| e.to_string())?;
    let last = *fam.last().unwrap();
    if (last - 0.58).abs() > 0.005 {
        return Err(format!("powers-of-3 capacity at L=4 is {last}, expected ~0.58"));
    }
    Ok(format!("7 constraint capacities within 1e-3; powers-of-3 reaches {last:.4} by L=4"))
}

/// Criterion 2: exact rational power metrics. The FSM average powers are
/// soft checks; the {10,011} local minimum is reported as a deviation from
/// the published value (the window definition yields 1/4, witness 0100).
fn criterion_2() -> Outcome {
    // (code, average, min sustainable, local min, average is soft)
    let expected = [
        (CodeId::Manchester, rational(1, 2), rational(1, 2), rational(1, 4), false),
        (CodeId::Vl10_011, rational(3, 5), rational(1, 2), rational(1, 4), false),
        (CodeId::Vl101_01101, rational(5, 8), rational(3, 5), rational(1, 3), false),
        (CodeId::Vl01_0111, rational(2, 3), rational(1, 2), rational(1, 3), false),
        (CodeId::Stuff12, rational(1, 2), rational(1, 3), rational(1, 5), false),
        (CodeId::Stuff13, rational(1, 2), rational(1, 4), rational(1, 7), false),
        (CodeId::Fsm12, rational(1, 2), rational(1, 3), rational(1, 5), true),
        (CodeId::Fsm13, rational(13, 24), rational(1, 4), rational(1, 7), true),
    ];
    let mut notes = Vec::new();
    for (code, avg, sust, local, soft_avg) in expected {
        let r = power_report(code).map_err(|e| e.to_string())?;
        if r.average != avg {
            let msg = format!("{} average {} vs published {avg}", code.name(), r.average);
            if soft_avg {
                notes.push(format!("soft-check mismatch: {msg}"));
            } else {
                return Err(msg);
            }
        }
        if r.min_sustainable != sust {
            return Err(format!(
                "{} min sustainable {} vs published {sust}",
                code.name(),
                r.min_sustainable
            ));
        }
        if r.local_min != local {
            return Err(format!(
                "{} local min {} vs expected {local}",
                code.name(),
                r.local_min
            ));
        }
    }
    notes.push(
        "deviation: {10,011} local minimum power is 1/4 by the window definition \
         (witness window 0100 in 10|10|011), not the published 1/3"
            .to_string(),
    );
    Ok(format!("all rational power metrics match; {}", notes.join("; ")))
}

/// Criterion 3: capacity solver checks (a)-(f).
fn criterion_3() -> Outcome {
    let opts = AscentOptions::default();

    // (a) gradient vs central finite differences on 100 random interior
    // points across L in {2,3,4}.
    let mut rng = substream(2026, 0xacce97, 0);
    for i in 0..100u32 {
        let l = 2 + (i % 3) as usize;
        let ch = build_truncated_channel(l as u32, 1e-8, &QuantizationScheme::rounding(), 0.15)
            .map_err(|e| e.to_string())?;
        // Interior point away from the boundary so the FD step stays valid.
        let raw: Vec<f64> = (0..l)
            .map(|_| 0.05 + (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64))
            .collect();
        let s: f64 = raw.iter().sum();
        let probs: Vec<f64> = raw.iter().map(|v| v / s).collect();
        let dist = InputDistribution::new(probs.clone()).map_err(|e| e.to_string())?;
        let grad = mi_gradient(&ch, &dist).map_err(|e| e.to_string())?;
        let h = 1e-6;
        for x in 0..l - 1 {
            let mut up = probs.clone();
            let mut dn = probs.clone();
            up[x] += h;
            up[l - 1] -= h;
            dn[x] -= h;
            dn[l - 1] += h;
            let vu = normalized_mi(&ch, &InputDistribution::new(up).unwrap()).unwrap();
            let vd = normalized_mi(&ch, &InputDistribution::new(dn).unwrap()).unwrap();
            let fd = (vu - vd) / (2.0 * h);
            if (grad[x] - fd).abs() > 1e-5 * fd.abs().max(1.0) {
                return Err(format!(
                    "gradient mismatch at L={l} point {i} coord {x}: {} vs {fd}",
                    grad[x]
                ));
            }
        }
    }

    // (b) quasiconcavity probe on 200 random segments.
    let ch3 = build_truncated_channel(3, 1e-8, &QuantizationScheme::rounding(), 0.15)
        .map_err(|e| e.to_string())?;
    let sample = |rng: &mut rand_chacha::ChaCha12Rng| -> Vec<f64> {
        let raw: Vec<f64> = (0..3)
            .map(|_| 1e-3 + (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64))
            .collect();
        let s: f64 = raw.iter().sum();
        raw.iter().map(|v| v / s).collect()
    };
    for _ in 0..200 {
        let f1 = sample(&mut rng);
        let f2 = sample(&mut rng);
        let v1 = normalized_mi(&ch3, &InputDistribution::new(f1.clone()).unwrap()).unwrap();
        let v2 = normalized_mi(&ch3, &InputDistribution::new(f2.clone()).unwrap()).unwrap();
        for k in 1..=9 {
            let lam = k as f64 / 10.0;
            let mix: Vec<f64> =
                f1.iter().zip(&f2).map(|(&a, &b)| lam * a + (1.0 - lam) * b).collect();
            let vm = normalized_mi(&ch3, &InputDistribution::new(mix).unwrap()).unwrap();
            if vm < v1.min(v2) - 1e-10 {
                return Err(format!("quasiconcavity violated: {vm} < min({v1}, {v2})"));
            }
        }
    }

    // (c) noiseless limit vs constraint capacity.
    for l in [2u32, 3] {
        let ch = build_truncated_channel(l, 1e-8, &QuantizationScheme::rounding(), 0.01)
            .map_err(|e| e.to_string())?;
        let res = maximize_capacity(&ch, &opts).map_err(|e| e.to_string())?;
        let runs: Vec<u32> = (1..=l).collect();
        let rll = rll_capacity(&RllConstraint::new(runs.clone(), runs).unwrap()).unwrap();
        if (res.capacity - rll).abs() > 5e-3 {
            return Err(format!("noiseless L={l}: {} vs RLL {rll}", res.capacity));
        }
    }

    // (d) + (e): capacity nonincreasing in eps; L=8 vs L=12 agree.
    let grid: Vec<f64> = (1..=8).map(|i| 0.05 * i as f64).collect();
    let mut curves = Vec::new();
    for l in [8u32, 12] {
        let mut curve = Vec::new();
        for &eps in &grid {
            let ch = build_truncated_channel(l, 1e-8, &QuantizationScheme::rounding(), eps)
                .map_err(|e| e.to_string())?;
            let res = maximize_capacity(&ch, &opts).map_err(|e| e.to_string())?;
            curve.push(res.capacity);
        }
        if !curve.windows(2).all(|w| w[0] >= w[1] - 1e-9) {
            return Err(format!("capacity not nonincreasing in eps at L={l}: {curve:?}"));
        }
        curves.push(curve);
    }
    for (i, &eps) in grid.iter().enumerate() {
        let d = (curves[0][i] - curves[1][i]).abs();
        if d > 5e-3 {
            return Err(format!("L=8 vs L=12 differ by {d} at eps={eps}"));
        }
    }

    // (f) scheme crossover at L=4.
    let cap = |scheme: &QuantizationScheme, eps: f64| -> Result<f64, String> {
        let ch = build_truncated_channel(4, 1e-8, scheme, eps).map_err(|e| e.to_string())?;
        Ok(maximize_capacity(&ch, &opts).map_err(|e| e.to_string())?.capacity)
    };
    let rounding = QuantizationScheme::rounding();
    let thresholds = QuantizationScheme::contiguous(4).map_err(|e| e.to_string())?;
    let (r_lo, t_lo) = (cap(&rounding, 0.05)?, cap(&thresholds, 0.05)?);
    let (r_hi, t_hi) = (cap(&rounding, 0.3)?, cap(&thresholds, 0.3)?);
    if t_lo < r_lo {
        return Err(format!("expected thresholds >= rounding at eps=0.05: {t_lo} < {r_lo}"));
    }
    if r_hi < t_hi {
        return Err(format!("expected rounding >= thresholds at eps=0.3: {r_hi} < {t_hi}"));
    }
    Ok(format!(
        "gradient, quasiconcavity, noiseless limit, monotonicity, L8~L12, crossover \
         (eps=0.05: {t_lo:.4} >= {r_lo:.4}; eps=0.3: {r_hi:.4} >= {t_hi:.4})"
    ))
}

/// Criterion 4: Monte Carlo within +/-25% of the closed forms.
fn criterion_4() -> Outcome {
    // (code, rounding scheme?, eps)
    let points = [
        (CodeId::Vl01_0111, false, 0.12),
        (CodeId::Vl01_0111, false, 0.15),
        (CodeId::Manchester, false, 0.08),
        (CodeId::Manchester, false, 0.10),
        (CodeId::Manchester, true, 0.08),
        (CodeId::Manchester, true, 0.10),
    ];
    let mut worst: f64 = 0.0;
    for (code, rounding, eps) in points {
        let scheme = if rounding {
            QuantizationScheme::rounding()
        } else {
            code.matched_scheme()
        };
        let config = SimConfig {
            code,
            epsilon: eps,
            scheme: scheme.clone(),
            k: 40,
            max_frames: 10_000_000,
            target_errors: 1000,
            master_seed: 2026,
            awgn: None,
        };
        let res = run_fer(&config).map_err(|e| e.to_string())?;
        if res.frame_errors < 200 {
            return Err(format!(
                "{} eps={eps}: only {} errors collected",
                code.name(),
                res.frame_errors
            ));
        }
        let pred = predict_fer_asymptotic(code, &scheme, 40, eps).map_err(|e| e.to_string())?;
        let rel = (res.fer - pred) / pred;
        if rel.abs() > 0.25 {
            return Err(format!(
                "{} {} eps={eps}: fer {:.6} vs prediction {pred:.6} ({:+.1}%)",
                code.name(),
                if rounding { "rounding" } else { "matched" },
                res.fer,
                100.0 * rel
            ));
        }
        worst = worst.max(rel.abs());
    }
    Ok(format!("6 points within +/-25% of closed forms (worst {:.1}%)", 100.0 * worst))
}

/// Criterion 5: FER ordering at eps = 0.1 with the per-code default schemes,
/// separations exceeding the summed 95% intervals (disjoint Wilson CIs).
fn criterion_5() -> Outcome {
    let sim = |code: CodeId| -> Result<_, String> {
        let mut cfg = SimConfig::standard(code, 0.1, 2026);
        cfg.max_frames = 1_000_000;
        run_fer(&cfg).map_err(|e| e.to_string())
    };
    let fsm13 = sim(CodeId::Fsm13)?;
    let vl01 = sim(CodeId::Vl01_0111)?;
    let man = sim(CodeId::Manchester)?;
    let vl10 = sim(CodeId::Vl10_011)?;
    for (better, worse) in [(&fsm13, &man), (&vl01, &man), (&man, &vl10)] {
        if better.ci_hi >= worse.ci_lo {
            return Err(format!(
                "{} [{:.2e},{:.2e}] not separated below {} [{:.2e},{:.2e}]",
                better.config.code.name(),
                better.ci_lo,
                better.ci_hi,
                worse.config.code.name(),
                worse.ci_lo,
                worse.ci_hi
            ));
        }
    }
    Ok(format!(
        "fsm-13 {:.1e}, vl-01-0111 {:.1e} < manchester {:.1e} < vl-10-011 {:.1e}, CIs disjoint",
        fsm13.fer, vl01.fer, man.fer, vl10.fer
    ))
}

/// Criterion 6: exhaustive roundtrip to k = 16 plus error-avoidance and the
/// two Manchester deletion sequences.
fn criterion_6() -> Outcome {
    let mut frames = 0u64;
    for code in CodeId::ALL {
        frames += verify_roundtrip(code, 16).map_err(|e| e.to_string())?.frames_checked;
    }

    // Injected run substitutions: 3->2 and 3->4 for the {1,3} codes, 2->3
    // for Fsm12 — exhaustive to k = 8, then random 16-bit frames.
    let cases: &[(CodeId, u32, &[u32])] = &[
        (CodeId::Vl01_0111, 3, &[2, 4]),
        (CodeId::Stuff13, 3, &[2, 4]),
        (CodeId::Fsm13, 3, &[2, 4]),
        (CodeId::Fsm12, 2, &[3]),
    ];
    let mut rng = substream(2026, 0xacce98, 0);
    for &(code, from, tos) in cases {
        let step = code.input_block();
        let mut frames: Vec<Vec<u8>> = Vec::new();
        let mut k = step;
        while k <= 8 {
            for pattern in 0..(1u32 << k) {
                frames.push((0..k).map(|i| ((pattern >> (k - 1 - i)) & 1) as u8).collect());
            }
            k += step;
        }
        for _ in 0..200 {
            frames.push((0..16).map(|_| (rng.next_u32() & 1) as u8).collect());
        }
        for info in &frames {
            let encoded = encode(code, info).map_err(|e| e.to_string())?;
            let runs = RunSequence::from_bits(&encoded).map_err(|e| e.to_string())?;
            for pos in 0..runs.runs.len() {
                if runs.runs[pos] != from {
                    continue;
                }
                for &to in tos {
                    let mut corrupted = runs.clone();
                    corrupted.runs[pos] = to;
                    if decode(code, &corrupted, info.len()) != *info {
                        return Err(format!(
                            "{}: {from}->{to} at run {pos} of {info:?} caused a frame error",
                            code.name()
                        ));
                    }
                }
            }
        }
    }

    // The published critical / non-critical Manchester deletion pair.
    let critical = [1u8, 0, 0, 1, 0, 1]; // info 1,0,0
    let mut del = critical.to_vec();
    del.remove(2);
    if decode_bits(CodeId::Manchester, &del, 3) == vec![1, 0, 0] {
        return Err("critical Manchester deletion unexpectedly decoded".into());
    }
    let benign = [1u8, 0, 0, 1, 1, 0]; // info 1,0,1
    let mut del = benign.to_vec();
    del.remove(2);
    if decode_bits(CodeId::Manchester, &del, 3) != vec![1, 0, 1] {
        return Err("benign Manchester deletion failed to decode".into());
    }
    Ok(format!("roundtrip over {frames} frames; error avoidance and criticality hold"))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 6] = [
        ("1 constraint capacities", criterion_1),
        ("2 power metrics", criterion_2),
        ("3 capacity solver", criterion_3),
        ("4 monte carlo vs closed forms", criterion_4),
        ("5 FER ordering", criterion_5),
        ("6 roundtrip and error avoidance", criterion_6),
    ];
    let mut failed = false;
    for (name, f) in criteria {
        match f() {
            Ok(detail) => println!("criterion {name}: PASS — {detail}"),
            Err(detail) => {
                failed = true;
                println!("criterion {name}: FAIL — {detail}");
            }
        }
    }
    println!("criterion 7 determinism: exercised by the CLI acceptance test");
    assert!(!failed, "one or more acceptance criteria failed");
}

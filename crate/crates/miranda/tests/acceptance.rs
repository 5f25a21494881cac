//! Acceptance suite: the binding end-to-end checks for the scheme at desk
//! scale. Each test covers one acceptance criterion at its stated
//! tolerance and prints a single `[PASS]` line with the measured numbers
//! (visible under `--nocapture`; a failed assertion is the fail line).

use miranda::analysis::{self, RowStatus};
use miranda::cryptanalysis::{self, AttackError, Distinguish};
use miranda::fdh::{self, PreimageSampler};
use miranda::field::FieldContext;
use miranda::gabidulin::MatrixGabidulin;
use miranda::keys::{keygen, ParameterSet, PublicKey};
use miranda::matrank::{self, random_code, random_rank_matrix, BinMatrix, BitVec, MatrixCode};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use std::time::Instant;

fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn set(name: &str) -> ParameterSet {
    analysis::param_by_name(name).expect("registry set")
}

/// Design-table reproduction: the size and density formulas recompute the
/// printed table rows, and the two rows whose printed sigma disagrees with
/// the size formula are flagged as known deviations rather than failures.
#[test]
fn table_reproduction() {
    let start = Instant::now();
    let reports = analysis::check_tables();
    let status = |name: &str| {
        reports
            .iter()
            .find(|r| r.name == name)
            .unwrap_or_else(|| panic!("{name} missing from the table report"))
            .status
            .clone()
    };

    // Standard rows (m = 149, 151, 281, 293, 307, 467, 479, 331, 673).
    for name in [
        "miranda-128a",
        "miranda-128b",
        "miranda-128c",
        "miranda-128d",
        "miranda-128e",
        "miranda-192b",
        "miranda-192c",
        "miranda-256a",
        "miranda-256c",
    ] {
        assert_eq!(status(name), RowStatus::Pass, "{name}");
    }
    // Low-density rows (m = 89, 97, 101, 139).
    for name in [
        "miranda-ld-128b",
        "miranda-ld-128c",
        "miranda-ld-128d",
        "miranda-ld-128e",
    ] {
        assert_eq!(status(name), RowStatus::Pass, "{name}");
    }
    // The two rows whose printed sigma deviates from the size formula:
    // the formula values are asserted exactly and the rows are flagged.
    assert_eq!(set("miranda-ld-128a").sig_size_bytes(), 63);
    assert_eq!(status("miranda-ld-128a"), RowStatus::KnownDeviation);
    assert_eq!(set("miranda-192a").sig_size_bytes(), 143);
    assert_eq!(status("miranda-192a"), RowStatus::KnownDeviation);
    // Nothing in the registry fails outright.
    assert!(reports.iter().all(|r| r.status != RowStatus::Fail));

    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 1.0, "table regression took {elapsed:.2} s (limit 1 s)");
    println!(
        "[PASS] table reproduction: {} rows, 2 known deviations, {elapsed:.3} s",
        reports.len()
    );
}

/// End-to-end correctness at toy-24: 100/100 sign-verify round trips,
/// 100/100 single-byte message tamperings rejected, and the mean decoding
/// trial count inside the factor-4 window around the density prediction.
#[test]
fn end_to_end_signing() {
    let start = Instant::now();
    let p = set("toy-24");
    let (pk, sk) = keygen(&p, b"acceptance-end-to-end");
    let sampler = PreimageSampler::new(&pk, &sk);
    let mut r = rng(0x2001);

    let mut total_trials = 0u64;
    for i in 0..100u32 {
        let msg = format!("acceptance message {i}").into_bytes();
        let report = sampler.sign(&msg, &mut r).expect("signing succeeds");
        total_trials += report.trials;
        assert_eq!(fdh::verify(&pk, &msg, &report.sig), Ok(()), "round trip {i}");

        // Flip one byte of the message; the signature must now reject.
        let mut tampered = msg.clone();
        tampered[i as usize % msg.len()] ^= 1 << (i % 8).max(1);
        assert!(
            fdh::verify(&pk, &tampered, &report.sig).is_err(),
            "tampered message {i} accepted"
        );
    }
    let mean = total_trials as f64 / 100.0;
    assert!(
        (4.0..=64.0).contains(&mean),
        "mean decoding trials {mean:.2} outside [4, 64]"
    );

    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 60.0, "end-to-end run took {elapsed:.1} s (limit 60 s)");
    println!(
        "[PASS] end-to-end signing: 100/100 round trips, 100/100 tampers rejected, \
         mean trials {mean:.2}, {elapsed:.1} s"
    );
}

/// Preimage-sampling non-leakage at micro-8: for five syndromes the sampler
/// is chi-square-uniform over the exhaustively enumerated preimage set, and
/// the extended-syndrome map is injective on the whole rank ball.
#[test]
fn preimage_uniformity() {
    let start = Instant::now();
    let p = set("micro-8");
    let (pk, sk) = keygen(&p, b"acceptance-uniformity");
    let sampler = PreimageSampler::new(&pk, &sk);
    let ball = analysis::enumerate_ball(p.m, p.n, p.t);
    assert_eq!(ball.len(), 65_026);

    // Exhaustive injectivity of the extended-syndrome map on the ball.
    let mut seen = std::collections::HashSet::with_capacity(ball.len());
    for x in &ball {
        let ext = matrank::syndrome(x, &pk.duals)
            .concat(&matrank::syndrome(x, &sk.extra))
            .to_lsb_bytes();
        assert!(seen.insert(ext), "extended syndrome collision on the ball");
    }

    let mut r = rng(0x3001);
    let mut p_values = Vec::new();
    for idx in 0..5 {
        // Fresh salted hashes give the audit syndromes; at micro-8 density
        // every syndrome has close to 254 preimages.
        let mut salt = vec![0u8; p.lambda / 8];
        r.fill_bytes(&mut salt);
        let syn = fdh::hash_to_syndrome(&p, &salt, b"uniformity");
        let preimages: Vec<&BinMatrix> = ball
            .iter()
            .filter(|x| matrank::syndrome(x, &pk.duals) == syn)
            .collect();
        assert!(preimages.len() > 1, "syndrome {idx} has no preimage set");

        let samples = 50 * preimages.len();
        let mut counts: std::collections::HashMap<Vec<u8>, u64> = std::collections::HashMap::new();
        for _ in 0..samples {
            let out = sampler.sample_preimage(&syn, &mut r).expect("sample succeeds");
            *counts.entry(out.preimage.to_rowvec().to_lsb_bytes()).or_insert(0) += 1;
        }
        // Every draw must land inside the enumerated set; chi-square the
        // per-element counts against the uniform prediction.
        let total: u64 = counts.values().sum();
        assert_eq!(total as usize, samples);
        let expected = samples as f64 / preimages.len() as f64;
        let mut chi2 = 0.0;
        let mut covered = 0u64;
        for x in &preimages {
            let o = *counts.get(&x.to_rowvec().to_lsb_bytes()).unwrap_or(&0);
            covered += o;
            let d = o as f64 - expected;
            chi2 += d * d / expected;
        }
        assert_eq!(covered, total, "a sample fell outside the preimage set");
        let p_value = analysis::chi_square_p_value(chi2, preimages.len() - 1);
        assert!(
            p_value > 1e-3,
            "syndrome {idx}: chi2 {chi2:.1} over {} preimages, p {p_value:.5}",
            preimages.len()
        );
        p_values.push(p_value);
    }

    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 600.0, "uniformity run took {elapsed:.1} s (limit 600 s)");
    println!(
        "[PASS] preimage uniformity: injective on 65026-ball, p-values {:?}, {elapsed:.1} s",
        p_values.iter().map(|v| (v * 1000.0).round() / 1000.0).collect::<Vec<_>>()
    );
}

/// Decoder contract at m = n = 24, kappa = 16 (radius 4): planted errors of
/// rank 0..=4 are recovered exactly every time, and rank-5 plants never
/// produce an output violating the rank bound or code membership.
#[test]
fn decoder_contract() {
    let start = Instant::now();
    let (m, n, kappa, t) = (24usize, 24usize, 16usize, 4usize);
    let ctx = FieldContext::new(m);
    let mut r = rng(0x4001);
    let gab = MatrixGabidulin::sample(&ctx, kappa, &mut r);
    let code = gab.matbasis();

    for tp in 0..=t {
        for trial in 0..10_000u32 {
            let c = code.combine(&BitVec::random(code.dim(), &mut r));
            let e = random_rank_matrix(m, n, tp, &mut r);
            let y = c.add(&e);
            let decoded = gab.decode_matrix(&y);
            assert_eq!(
                decoded.as_ref(),
                Some(&e),
                "rank-{tp} plant not recovered exactly (trial {trial})"
            );
        }
    }

    // Beyond the radius: outputs are allowed (or None), but every non-None
    // output must still satisfy the post-verification contract.
    let mut beyond_radius_hits = 0u32;
    for _ in 0..10_000u32 {
        let c = code.combine(&BitVec::random(code.dim(), &mut r));
        let e = random_rank_matrix(m, n, t + 1, &mut r);
        let y = c.add(&e);
        if let Some(out) = gab.decode_matrix(&y) {
            beyond_radius_hits += 1;
            assert!(out.rank() <= t, "decoder output beyond the rank bound");
            assert!(code.contains(&y.add(&out)), "decoder output outside the code coset");
        }
    }

    let elapsed = start.elapsed().as_secs_f64();
    println!(
        "[PASS] decoder contract: 5 x 10000/10000 exact recoveries, \
         {beyond_radius_hits} rank-5 outputs all within contract, {elapsed:.1} s"
    );
}

/// Counting oracles: exact sphere/ball formulas match exhaustive rank
/// census for every shape with mn <= 16, and the first-column counting
/// identity holds exhaustively at (3, 3, 2).
#[test]
fn counting_oracles() {
    let start = Instant::now();
    let mut shapes = 0usize;
    for m in 1..=16usize {
        for n in 1..=16usize {
            if m * n > 16 {
                continue;
            }
            shapes += 1;
            let mut census = vec![0u64; m.min(n) + 1];
            for bits in 0u64..(1u64 << (m * n)) {
                let x = BinMatrix::from_fn(m, n, |i, j| (bits >> (i * n + j)) & 1 == 1);
                census[x.rank()] += 1;
            }
            for (s, &count) in census.iter().enumerate() {
                assert_eq!(
                    analysis::sphere_exact(m, n, s).to_string(),
                    count.to_string(),
                    "sphere({m}, {n}, {s})"
                );
            }
            let ball: u64 = census.iter().sum();
            assert_eq!(analysis::ball_exact(m, n, m.min(n)).to_string(), ball.to_string());
        }
    }

    // First-column identity at (u, v, s) = (3, 3, 2): among rank-2 3x3
    // matrices, the zero first column accounts for sphere(3, 2, 2) of them
    // and every fixed nonzero first column for an equal share of the rest.
    let (u, v, s) = (3usize, 3usize, 2usize);
    let mut by_first_column = vec![0u64; 1 << u];
    for bits in 0u64..(1u64 << (u * v)) {
        let x = BinMatrix::from_fn(u, v, |i, j| (bits >> (i * v + j)) & 1 == 1);
        if x.rank() == s {
            let col = (0..u).fold(0usize, |acc, i| acc | (usize::from(x.get(i, 0)) << i));
            by_first_column[col] += 1;
        }
    }
    let sphere_small: u64 = analysis::sphere_exact(u, v - 1, s).to_string().parse().unwrap();
    let sphere_full: u64 = analysis::sphere_exact(u, v, s).to_string().parse().unwrap();
    assert_eq!(by_first_column[0], sphere_small, "zero first column count");
    let share = (sphere_full - sphere_small) / ((1 << u) - 1);
    for (col, &count) in by_first_column.iter().enumerate().skip(1) {
        assert_eq!(count, share, "first column {col:03b}");
    }

    let elapsed = start.elapsed().as_secs_f64();
    println!(
        "[PASS] counting oracles: {shapes} shapes censused, first-column identity \
         exact at (3,3,2), {elapsed:.1} s"
    );
}

/// Constrained-search calibration: across a grid of random codes the mean
/// loop count stays within factor 4 of the rank-profile prediction
/// (>= 1000 searches per cell), and the terminal rank s = n - a succeeds
/// in exactly one loop, 100/100.
#[test]
fn search_calibration() {
    let start = Instant::now();
    // (m, n, code dim, target rank): shapes with mn <= 36 and a prediction
    // small enough to average 1000 searches per cell quickly.
    let cells = [
        (4usize, 4usize, 5usize, 1usize),
        (4, 4, 5, 2),
        (6, 6, 13, 2),
        (6, 6, 13, 3),
        (4, 6, 9, 2),
        (4, 6, 9, 3),
        (6, 4, 9, 1),
        (6, 4, 9, 2),
        (5, 7, 11, 3),
    ];
    let mut r = rng(0x6001);
    let mut ratios = Vec::new();
    for &(m, n, k, s) in &cells {
        let a = (k - 1) / m;
        let b = k - a * m;
        assert!(s < n - a, "cell ({m},{n},{k},{s}) is not in the geometric regime");
        let predicted = 1.0 / analysis::rank_profile_probability(m, n, 2, a, b, s);
        let budget = ((predicted * 100.0).ceil() as usize).max(64);
        let mut loops = 0u64;
        let searches = 1000u32;
        for _ in 0..searches {
            let code = random_code(m, n, k, &mut r);
            match cryptanalysis::find_low_rank(&code, s, budget, &mut r) {
                Ok(hit) => loops += hit.loops as u64,
                Err(_) => loops += budget as u64,
            }
        }
        let mean = loops as f64 / searches as f64;
        let ratio = mean / predicted;
        assert!(
            (0.25..=4.0).contains(&ratio),
            "cell ({m},{n},{k},{s}): mean {mean:.2} vs predicted {predicted:.2}"
        );
        ratios.push((ratio * 100.0).round() / 100.0);
    }

    // Terminal rank: s = n - a is reached on the first loop, every time.
    for trial in 0..100u32 {
        let code = random_code(5, 5, 13, &mut r);
        let hit = cryptanalysis::find_low_rank(&code, 3, 8, &mut r).expect("terminal rank");
        assert_eq!(hit.loops, 1, "terminal-rank trial {trial} took extra loops");
    }

    let elapsed = start.elapsed().as_secs_f64();
    println!(
        "[PASS] search calibration: {} cells within factor 4 (ratios {ratios:?}), \
         terminal rank 100/100 single-loop, {elapsed:.1} s",
        cells.len()
    );
}

/// Distinguisher: 20 toy duals against 20 random codes of the same
/// dimensions, all 40 labeled correctly with a budget of ten times the
/// random-code loop expectation.
#[test]
fn distinguisher_labels() {
    let start = Instant::now();
    let p = set("toy-16");
    // Random-code expectation from the profile approximation: the rank
    // defect exponent at s = kappa is 4 bits, so 16 loops expected and a
    // budget of 160.
    let budget = 160usize;
    let mut r = rng(0x7001);
    let mut correct = 0u32;
    for key in 0..20u8 {
        let (pk, _) = keygen(&p, &[0x70 + key; 16]);
        let dual = MatrixCode::new(p.m, p.n, pk.duals);
        let report = cryptanalysis::distinguish(&dual, &p, budget, &mut r);
        if report.verdict == Distinguish::Structured {
            correct += 1;
        }
    }
    for _ in 0..20 {
        let code = random_code(p.m, p.n, p.syn_len(), &mut r);
        let report = cryptanalysis::distinguish(&code, &p, budget, &mut r);
        if report.verdict == Distinguish::RandomLike {
            correct += 1;
        }
    }
    assert_eq!(correct, 40, "distinguisher mislabeled {} codes", 40 - correct);

    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 300.0, "distinguisher run took {elapsed:.1} s (limit 300 s)");
    println!("[PASS] distinguisher: 40/40 correct labels at budget {budget}, {elapsed:.1} s");
}

/// Structural attack demonstration: the stabilizer algebra of at least
/// eight of ten deliberately weak keys is recovered within 10^4 outer
/// iterations, and ten random codes yield zero spurious recoveries.
#[test]
fn structural_attack_demonstration() {
    let start = Instant::now();
    let p = set("weak-12");
    let budget = 10_000usize;

    let mut recovered = 0u32;
    let mut iterations = Vec::new();
    for key in 0..10u8 {
        let (pk, _) = keygen(&p, &[0x40 + key; 16]);
        let mut r = rng(0x500 + key as u64);
        if let Ok(rec) = cryptanalysis::structural_attack(&pk, budget, &mut r) {
            assert_eq!(rec.algebra.len(), p.m, "algebra dimension");
            assert_eq!(rec.supercode_dim, p.m * (p.n - p.kappa), "supercode dimension");
            recovered += 1;
            iterations.push(rec.iterations);
        }
    }
    assert!(recovered >= 8, "only {recovered}/10 weak keys recovered");

    let mut spurious = 0u32;
    for key in 0..10u64 {
        let mut r = rng(0x800 + key);
        let duals = random_code(p.m, p.n, p.syn_len(), &mut r);
        let pk = PublicKey {
            params: p.clone(),
            duals: duals.basis().to_vec(),
        };
        match cryptanalysis::structural_attack(&pk, budget, &mut r) {
            Ok(_) => spurious += 1,
            Err(AttackError::Exhausted { .. }) => {}
            Err(e) => panic!("unexpected failure on random code: {e}"),
        }
    }
    assert_eq!(spurious, 0, "{spurious}/10 random codes recovered spuriously");

    let elapsed = start.elapsed().as_secs_f64();
    println!(
        "[PASS] structural attack: {recovered}/10 weak keys (iterations {iterations:?}), \
         0/10 spurious, {elapsed:.1} s"
    );
}

/// Syndrome-lemma Monte-Carlo suite: the syndrome of a fixed low-rank probe
/// under fresh randomized codes is never zero and chi-square-uniform on the
/// nonzero buckets (10^5 trials at m = n = 4), and the observed collision
/// frequency at micro scale sits within three standard errors of the
/// closed form.
#[test]
fn syndrome_lemmas() {
    let start = Instant::now();
    let mut r = rng(0x9001);
    let report = analysis::probfund_check(4, 4, 2, 100_000, &mut r);
    assert_eq!(report.zero_count, 0, "probe syndrome hit zero");
    // Uniform within 3 sigma: the aggregate chi-square stays within three
    // standard deviations of its mean (dof, variance 2*dof).
    let dof = report.dof as f64;
    let bound = 3.0 * (2.0 * dof).sqrt();
    assert!(
        (report.chi2 - dof).abs() <= bound,
        "chi2 {:.1} outside {dof} +- {bound:.1}",
        report.chi2
    );

    let p = set("micro-8");
    let collision = analysis::collision_bias_estimate(&p, 40, 2500, &mut r);
    let deviation = (collision.p_hat - collision.p_closed).abs();
    assert!(
        deviation <= 3.0 * collision.sigma_hat,
        "collision bias {deviation:.6} beyond 3 sigma ({:.6})",
        collision.sigma_hat
    );

    let elapsed = start.elapsed().as_secs_f64();
    println!(
        "[PASS] syndrome lemmas: zero-mass 0/100000, chi2 {:.1} (dof {}), collision \
         within {:.2} sigma, {elapsed:.1} s",
        report.chi2,
        report.dof,
        if collision.sigma_hat > 0.0 {
            deviation / collision.sigma_hat
        } else {
            0.0
        }
    );
}

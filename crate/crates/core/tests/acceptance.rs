//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//! Runs without the libtest harness so the lines are always printed.

mod common;

use std::time::Instant;

use common::*;
use egh_core::fixtures::{cycle_refinement, rectangle_flip_scenario};
use egh_core::quotients::coset_space;
use egh_core::scenario::{run_scenario, ConvergenceScenario, SymmetryMode};
use egh_core::smoothing::{default_embedding, greedy_net, smooth_theta, BumpSpec, NetSpec};
use egh_core::solver::{basepoint_repair, best_triple_for_f, egh_distance, SearchConfig};
use egh_core::triples::{almost_inverse, compose_triples, perturb_theta, theta_as_approximation};
use egh_core::{ApproxTriple, GSpace, Scalar};
use num_rational::BigRational;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

type Case = (GSpace<f64>, GSpace<f64>, ApproxTriple<f64>);

/// Every triple between every pair of the small corpus.
fn exhaustive_triples(visit: impl Fn(&GSpace<f64>, &GSpace<f64>, &ApproxTriple<f64>) + Sync) -> usize {
    let corpus = small_corpus::<f64>();
    let pairs: Vec<(usize, usize)> = (0..corpus.len())
        .flat_map(|a| (0..corpus.len()).map(move |b| (a, b)))
        .collect();
    pairs
        .into_par_iter()
        .map(|(a, b)| {
            let (src, dst) = (&corpus[a], &corpus[b]);
            let mut count = 0;
            for f in all_maps(src.points(), dst.points()) {
                for theta in all_maps(src.order(), dst.order()) {
                    for psi in all_maps(dst.order(), src.order()) {
                        let t = ApproxTriple::new(src, dst, f.clone(), theta.clone(), psi).unwrap();
                        visit(src, dst, &t);
                        count += 1;
                    }
                }
            }
            count
        })
        .sum()
}

/// Seeded triples on pairs with up to six points and groups of order up to
/// eight: a third uniformly random, a third with θ, ψ optimal for a random
/// `f`, a third between a space and a perturbed copy of itself.
fn random_triples(count: usize, seed: u64) -> Vec<Case> {
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng(seed.wrapping_mul(1_000_003).wrapping_add(i as u64));
            let src = random_gspace::<f64>(&mut rng, 6, 8);
            let dst = if i % 3 == 2 { src.clone() } else { random_gspace::<f64>(&mut rng, 6, 8) };
            let (mut f, theta, psi) = random_maps(&mut rng, &src, &dst);
            let t = match i % 3 {
                0 => ApproxTriple::new(&src, &dst, f, theta, psi).unwrap(),
                1 => best_triple_for_f(&src, &dst, f).unwrap(),
                _ => {
                    // identity with a few points moved
                    let mut id: Vec<usize> = (0..src.points()).collect();
                    for p in id.iter_mut() {
                        if rng.gen_bool(0.3) {
                            *p = f[*p];
                        }
                    }
                    f = id;
                    best_triple_for_f(&src, &dst, f).unwrap()
                }
            };
            (src, dst, t)
        })
        .collect()
}

fn criterion_1(random: &[Case]) -> Verdict {
    let failures = std::sync::atomic::AtomicUsize::new(0);
    let check = |src: &GSpace<f64>, dst: &GSpace<f64>, t: &ApproxTriple<f64>| {
        let inv = almost_inverse(src, dst, t).unwrap();
        let eps = t.order();
        let ok = inv.triple.order() <= 4.0 * eps + 1e-9
            && inv.target_roundtrip <= 3.0 * eps + 1e-9
            && inv.source_roundtrip <= 3.0 * eps + 1e-9
            && inv.report.all_pass();
        if !ok {
            failures.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        }
    };
    let exhaustive = exhaustive_triples(check);
    random.par_iter().for_each(|(s, d, t)| check(s, d, t));
    let failed = failures.into_inner();
    verdict(
        failed == 0,
        format!(
            "almost-inverse order <= 4e and round trips <= 3e on {exhaustive} exhaustive + {} random triples, {failed} violations",
            random.len()
        ),
    )
}

fn criterion_2(random: &[Case]) -> Verdict {
    let failures = std::sync::atomic::AtomicUsize::new(0);
    let worst = std::sync::Mutex::new([0.0f64; 3]);
    let check = |src: &GSpace<f64>, dst: &GSpace<f64>, t: &ApproxTriple<f64>| {
        let r = theta_as_approximation(src, dst, t).unwrap();
        let eps = t.order();
        let m: Vec<f64> = ["theta_covering", "theta_expansion", "theta_contraction"]
            .iter()
            .map(|n| r.get(n).unwrap().measured)
            .collect();
        if !(m[0] <= 4.0 * eps + 1e-9 && m[1] <= 5.0 * eps + 1e-9 && m[2] <= 5.0 * eps + 1e-9) {
            failures.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        }
        if eps > 0.0 {
            let mut w = worst.lock().unwrap();
            for k in 0..3 {
                w[k] = w[k].max(m[k] / eps);
            }
        }
    };
    let exhaustive = exhaustive_triples(check);
    random.par_iter().for_each(|(s, d, t)| check(s, d, t));
    let failed = failures.into_inner();
    let w = worst.into_inner().unwrap();
    verdict(
        failed == 0,
        format!(
            "theta covering <= 4e, expansion/contraction <= 5e on {} triples, {failed} violations (sharpest ratios {:.3}, {:.3}, {:.3})",
            exhaustive + random.len(),
            w[0],
            w[1],
            w[2]
        ),
    )
}

/// A replacement θ drawn element-wise from the ε-ball around θ.
fn close_theta(rng: &mut ChaCha8Rng, dst: &GSpace<f64>, t: &ApproxTriple<f64>) -> Vec<usize> {
    let eps = t.order();
    let metric = dst.group_metric();
    t.theta
        .iter()
        .map(|&g| {
            let ball: Vec<usize> = (0..dst.order()).filter(|&h| *metric.d(g, h) <= eps).collect();
            ball[rng.gen_range(0..ball.len())]
        })
        .collect()
}

fn criterion_3(random: &[Case]) -> Verdict {
    let mut rng = rng(3);
    let mut cases = 0;
    let mut moved = 0;
    let mut failed = 0;
    for (src, dst, t) in random.iter().cycle().take(600) {
        let theta2 = close_theta(&mut rng, dst, t);
        moved += usize::from(theta2 != t.theta);
        let p = perturb_theta(src, dst, t, &theta2).unwrap();
        let eps = t.order();
        let defects = |name: &str| p.report.get(name).unwrap().measured;
        let ok = p.triple.order() <= 2.0 * eps + 1e-9
            && ["theta_covering", "theta_expansion", "theta_contraction"]
                .iter()
                .all(|n| defects(n) <= 10.0 * eps + 1e-9)
            && p.report.all_pass();
        failed += usize::from(!ok);
        cases += 1;
    }
    verdict(
        failed == 0 && cases >= 200,
        format!("perturbed triple <= 2e and theta' <= 10e on {cases} pairs ({moved} with theta' != theta), {failed} violations"),
    )
}

fn criterion_4() -> Verdict {
    let instances = 120;
    let results: Vec<(bool, bool)> = (0..instances)
        .into_par_iter()
        .map(|i| {
            let make = || {
                let mut r = rng(40_000 + i);
                let a = random_gspace::<f64>(&mut r, 4, 4);
                let b = random_gspace::<f64>(&mut r, 4, 4);
                (a, b)
            };
            let make_exact = || {
                let mut r = rng(40_000 + i);
                let a = random_gspace::<BigRational>(&mut r, 4, 4);
                let b = random_gspace::<BigRational>(&mut r, 4, 4);
                (a, b)
            };
            let (a, b) = make();
            let cert = egh_distance(&a, &b, &SearchConfig::exact(10_000_000)).unwrap();
            let float_ok = cert.optimal && (cert.value - oracle_distance(&a, &b)).abs() <= 1e-9;
            let (a, b) = make_exact();
            let cert = egh_distance(&a, &b, &SearchConfig::exact(10_000_000)).unwrap();
            let exact_ok = cert.optimal && cert.value == oracle_distance(&a, &b);
            (float_ok, exact_ok)
        })
        .collect();
    let float_bad = results.iter().filter(|r| !r.0).count();
    let exact_bad = results.iter().filter(|r| !r.1).count();
    verdict(
        float_bad == 0 && exact_bad == 0,
        format!("solver matches full enumeration on {instances} instances: {float_bad} float mismatches, {exact_bad} rational mismatches"),
    )
}

fn criterion_5() -> Verdict {
    let mut rng = rng(5);
    let mut cases = 0;
    let mut failed = 0;
    let mut sharpest: f64 = 0.0;
    while cases < 250 {
        let src = random_gspace::<f64>(&mut rng, 6, 8);
        let dst = random_gspace::<f64>(&mut rng, 6, 8);
        let (f, _, _) = random_maps(&mut rng, &src, &dst);
        let eps = egh_core::space::map_defects(src.space(), dst.space(), &f).unwrap().order();
        let candidates: Vec<(usize, usize)> = (0..src.points())
            .flat_map(|p| (0..dst.points()).map(move |q| (p, q)))
            .filter(|&(p, q)| *dst.space().d(f[p], q) <= eps && f[p] != q)
            .collect();
        if candidates.is_empty() {
            continue;
        }
        let (pre, target) = candidates[rng.gen_range(0..candidates.len())];
        let r = basepoint_repair(src.space(), dst.space(), &f, pre, target).unwrap();
        if !(r.repaired_order <= 2.0 * r.original_order + 1e-9 && r.report.all_pass()) {
            failed += 1;
        }
        if r.original_order > 0.0 {
            sharpest = sharpest.max(r.repaired_order / r.original_order);
        }
        cases += 1;
    }
    verdict(
        failed == 0,
        format!("repaired order <= 2e on {cases} repairs, {failed} violations, sharpest measured ratio {sharpest:.4}"),
    )
}

fn criterion_6() -> Verdict {
    let mut steps = 0;
    let mut guaranteed = 0;
    let mut failed = 0;
    let mut collapsed = 0;
    let mut collapsed_counterexamples = 0;
    for i in 0..80u64 {
        let mut r = rng(60_000 + i);
        let n = r.gen_range(2..=5);
        let limit = random_gspace_with::<f64>(&mut r, n, 8);
        let gen = r.gen_range(0..limit.order());
        let s = ConvergenceScenario {
            limit,
            subgroup: vec![gen],
            schedule: vec![0.4, 0.2, 0.1, 0.05],
            seed: i,
            symmetry: if i % 2 == 0 { SymmetryMode::Transport } else { SymmetryMode::Recompute },
            budget: 10_000_000,
        };
        let report = run_scenario(&s).unwrap();
        for step in &report.steps {
            if !step.coset.covering_check.pass {
                failed += 1;
            }
            if step.collapsed {
                collapsed += 1;
                collapsed_counterexamples += usize::from(!step.coset.implication_holds());
                continue;
            }
            steps += 1;
            guaranteed += usize::from(step.coset.guaranteed);
            if step.coset.guaranteed && !step.coset.surjective {
                failed += 1;
            }
        }
    }

    let flip = run_scenario(&rectangle_flip_scenario()).unwrap();
    let gap = coset_space(&flip_limit(), &[0, 1]).unwrap().gap.unwrap();
    let verdicts: Vec<bool> = flip.steps.iter().map(|s| s.coset.guaranteed).collect();
    let exact_flip = flip.steps.iter().all(|s| s.coset.guaranteed == (s.epsilon < gap));
    let flips = !verdicts[0] && verdicts.windows(2).filter(|w| w[0] != w[1]).count() == 1;
    let flip_ok = exact_flip && flips && flip.gap_implication && flip.certified && !flip.steps[0].coset.surjective;
    let trace: Vec<String> = flip.steps.iter().map(|s| format!("{:.3}", s.epsilon)).collect();
    verdict(
        failed == 0 && flip_ok && guaranteed > 0,
        format!(
            "e < gap => surjective on {steps} scenario steps ({guaranteed} guaranteed), {failed} violations; {collapsed} collapsed steps recorded as events ({collapsed_counterexamples} of them miss a coset); flip scenario gap {gap} eps [{}] verdicts {:?}",
            trace.join(", "),
            verdicts
        ),
    )
}

fn flip_limit() -> GSpace<f64> {
    rectangle_flip_scenario().limit
}

fn smallest_gap(g: &GSpace<f64>) -> f64 {
    let m = g.group_metric();
    (0..m.len())
        .flat_map(|a| ((a + 1)..m.len()).map(move |b| *m.d(a, b)))
        .fold(f64::INFINITY, f64::min)
        .min(1.0)
}

fn criterion_7(random: &[Case]) -> Verdict {
    let mut degenerate = 0;
    let mut degenerate_bad = 0;
    let mut recertified = 0;
    let mut recert_bad = 0;
    for (src, dst, t) in random.iter().take(300) {
        let emb = default_embedding(dst);
        let net = NetSpec::all(src);
        let cutoff = smallest_gap(src);
        for bump in [BumpSpec::indicator(cutoff), BumpSpec::tent(cutoff)] {
            let r = smooth_theta(src, dst, t, &emb, &net, &bump).unwrap();
            degenerate += 1;
            degenerate_bad += usize::from(r.theta2 != t.theta || !r.within_ceiling);
            if let Some(c) = &r.recertification {
                recertified += 1;
                recert_bad += usize::from(!c.report.all_pass());
            }
        }
    }

    let mut refinement = Vec::new();
    let mut monotone = true;
    for seed in 0..4 {
        let mut row = Vec::new();
        for n in [8, 16, 32] {
            let (src, dst, t) = cycle_refinement::<f64>(n, 128, seed);
            let eps = t.order();
            let emb = default_embedding(&dst);
            let net = greedy_net(&src, 5.0 * eps).unwrap();
            let r = smooth_theta(&src, &dst, &t, &emb, &net, &BumpSpec::tent(10.0 * eps)).unwrap();
            if !r.within_ceiling {
                recert_bad += 1;
            }
            if let Some(c) = &r.recertification {
                recertified += 1;
                recert_bad += usize::from(!c.report.all_pass());
            }
            row.push((eps, r.measured));
        }
        monotone &= row.windows(2).all(|w| w[1].1 < w[0].1);
        refinement.push(row);
    }
    let table: Vec<String> = refinement[0]
        .iter()
        .zip([8, 16, 32])
        .map(|((e, m), n)| format!("n={n} e={e:.4} d={m:.4}"))
        .collect();
    verdict(
        degenerate_bad == 0 && recert_bad == 0 && monotone && recertified > 0,
        format!(
            "degenerate net gives theta' = theta on {degenerate} runs ({degenerate_bad} bad); refinement monotone over 4 seeds: {monotone} [{}]; {recertified} re-certifications, {recert_bad} failures",
            table.join("; ")
        ),
    )
}

fn criterion_8() -> Verdict {
    let mut corpus = small_corpus::<f64>();
    let mut r = rng(8);
    for _ in 0..60 {
        corpus.push(random_gspace::<f64>(&mut r, 6, 8));
    }
    let self_bad = corpus
        .par_iter()
        .filter(|g| {
            let c = egh_distance(g, g, &SearchConfig::default()).unwrap();
            !(c.value == 0.0 && c.optimal && c.witness_forward.order() == 0.0 && c.witness_backward.order() == 0.0)
        })
        .count();

    let mut comp_bad = 0;
    let mut sharpest: f64 = 0.0;
    for i in 0..250 {
        let a = random_gspace::<f64>(&mut r, 5, 8);
        let b = random_gspace::<f64>(&mut r, 5, 8);
        let c = random_gspace::<f64>(&mut r, 5, 8);
        let t1 = structured(&mut r, &a, &b, i);
        let t2 = structured(&mut r, &b, &c, i + 1);
        let comp = compose_triples(&a, &b, &c, &t1, &t2).unwrap();
        let bound = t1.order() + 2.0 * t2.order();
        comp_bad += usize::from(!(comp.triple.order() <= bound + 1e-9 && comp.check.pass));
        if bound > 0.0 {
            sharpest = sharpest.max(comp.triple.order() / bound);
        }
    }
    verdict(
        self_bad == 0 && comp_bad == 0,
        format!(
            "self-distance 0 on {} pairs ({self_bad} bad); composition <= e1 + 2e2 on 250 compositions ({comp_bad} bad, sharpest ratio {sharpest:.4})",
            corpus.len()
        ),
    )
}

fn structured<S: Scalar>(r: &mut ChaCha8Rng, src: &GSpace<S>, dst: &GSpace<S>, i: usize) -> ApproxTriple<S> {
    let (f, theta, psi) = random_maps(r, src, dst);
    if i.is_multiple_of(2) {
        ApproxTriple::new(src, dst, f, theta, psi).unwrap()
    } else {
        best_triple_for_f(src, dst, f).unwrap()
    }
}

fn main() {
    let start = Instant::now();
    let random = random_triples(600, 1);
    let criteria: Vec<(usize, fn(&[Case]) -> Verdict)> = vec![
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, |_| criterion_4()),
        (5, |_| criterion_5()),
        (6, |_| criterion_6()),
        (7, criterion_7),
        (8, |_| criterion_8()),
    ];
    let mut all = true;
    for (n, run) in criteria {
        let t = Instant::now();
        let v = run(&random);
        all &= v.pass;
        println!(
            "[{}] criterion {n}: {} ({:.1}s)",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!("acceptance finished in {:.1}s", start.elapsed().as_secs_f64());
    if !all {
        std::process::exit(1);
    }
}

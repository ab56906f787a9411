//! Quantitative acceptance checks, one line per criterion.
//!
//! Runs as a plain binary (no libtest harness) so every criterion reports
//! even when an earlier one fails. Exits nonzero if any check fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use gpd_sparsify::erosion::{dhat, eps_21, eps_pq};
use gpd_sparsify::geometry::{
    grid_domain, Domain, DomainVector, GridSpec, IntervalVec6, SampleRange,
};
use gpd_sparsify::gpd::{gri, mobius_inversion, sparse_erosion_distance, Bar, Barcode};
use gpd_sparsify::io;
use gpd_sparsify::optim::{optimize, OptimConfig};
use gpd_sparsify::oracle::{brute_dhat, brute_lipschitz, brute_mobius, joint_diagonal};
use gpd_sparsify::pipeline::time_delay_embed;
use gpd_sparsify::random::{
    random_barcode, random_pq, random_pq_domain, random_vec6, random_vec6_domain,
};
use gpd_sparsify::subgrad::build_loss_graph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, Option<u64>, fn() -> Check);

fn rng(stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(0x5eed);
    r.set_stream(stream);
    r
}

fn real_vec6(r: &mut ChaCha8Rng) -> IntervalVec6 {
    let notch = |r: &mut ChaCha8Rng| {
        if r.gen_bool(0.25) {
            0.0
        } else {
            r.gen_range(0.0..0.4)
        }
    };
    let (b, c) = (notch(r), notch(r));
    IntervalVec6::new(
        r.gen(),
        r.gen(),
        r.gen_range(0.0..0.5),
        b,
        c,
        r.gen_range(0.0..0.5),
    )
    .unwrap()
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn closed_forms() -> Check {
    let mut r = rng(1);
    let mut worst = 0.0f64;
    for k in 0..10_000 {
        let (u, v) = if k % 2 == 0 {
            (random_vec6(&mut r, false), random_vec6(&mut r, false))
        } else {
            (real_vec6(&mut r), real_vec6(&mut r))
        };
        let gap =
            (eps_21(&u, &v) - eps_pq(&u.decode().map_err(err)?, &v.decode().map_err(err)?)).abs();
        worst = worst.max(gap);
    }
    let msg = format!("10000 pairs, max |diff| {worst:.3e}");
    if worst <= 1e-12 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn raster_agreement() -> Check {
    let mut r = rng(2);
    let mut worst_ratio = 0.0f64;
    for k in 0..200 {
        let (n, m) = (r.gen_range(1..=8), r.gen_range(1..=8));
        let (a, b) = if k % 2 == 0 {
            (
                random_vec6_domain(&mut r, n, true),
                random_vec6_domain(&mut r, m, true),
            )
        } else {
            (
                random_pq_domain(&mut r, n, true),
                random_pq_domain(&mut r, m, true),
            )
        };
        let (ia, ib) = (a.intervals().map_err(err)?, b.intervals().map_err(err)?);
        let h = joint_diagonal(ia.iter().chain(&ib)) / 256.0;
        let exact = dhat(&a, &b).map_err(err)?;
        let brute = brute_dhat(&a, &b, h).map_err(err)?;
        let ratio = (exact - brute).abs() / h;
        if ratio > 2.0 {
            return Err(format!(
                "case {k}: dhat {exact} vs raster {brute} with h {h}"
            ));
        }
        worst_ratio = worst_ratio.max(ratio);
    }
    Ok(format!("200 domain pairs, max |diff| {worst_ratio:.3} h"))
}

fn mobius_round_trip() -> Check {
    let mut r = rng(3);
    let mut nonzero = 0usize;
    for k in 0..200 {
        let len = r.gen_range(1..=30);
        let base = random_pq_domain(&mut r, len, false)
            .intervals()
            .map_err(err)?;
        let mut intervals = base.clone();
        let mut bars = random_barcode(&mut r, 3).bars().to_vec();
        // nested thickenings and exact duplicates make the inversion nontrivial
        while intervals.len() < 40 && r.gen_bool(0.8) {
            let pick = base[r.gen_range(0..base.len())].clone();
            let t = r.gen_range(0..=16) as f64 / 64.0;
            intervals.push(pick.thicken(t).map_err(err)?);
            if r.gen_bool(0.3) {
                bars.push(Bar {
                    interval: pick
                        .thicken(r.gen_range(0..=16) as f64 / 64.0)
                        .map_err(err)?,
                    mult: r.gen_range(1..=3),
                });
            }
        }
        let module = Barcode::new(bars).map_err(err)?;
        let domain = Domain::from_intervals("d", intervals.clone()).map_err(err)?;
        let rk = gri(&module, &domain).map_err(err)?;
        let dgm = mobius_inversion(&rk).map_err(err)?;
        if dgm != brute_mobius(&rk).map_err(err)? {
            return Err(format!("case {k}: inversion differs from the dense solve"));
        }
        let kept = dgm.domain().intervals().map_err(err)?;
        for (i, iv) in intervals.iter().enumerate() {
            let sum: i64 = kept
                .iter()
                .zip(dgm.values())
                .filter(|(j, _)| j.contains(iv))
                .map(|(_, v)| v)
                .sum();
            if sum != rk.values()[i] as i64 {
                return Err(format!(
                    "case {k}: interval {i} sums to {sum}, rank {}",
                    rk.values()[i]
                ));
            }
        }
        nonzero += dgm.values().iter().filter(|&&v| v != 0).count();
    }
    Ok(format!("200 instances, {nonzero} nonzero diagram entries"))
}

fn single_bar_diagrams() -> Check {
    let mut r = rng(4);
    for k in 0..100 {
        let bar = random_pq(&mut r, false);
        let mult = r.gen_range(1..=5u64);
        // the two-element chain B < B' first, then random extras
        let mut intervals = vec![
            bar.clone(),
            bar.thicken(r.gen_range(1..=16) as f64 / 64.0)
                .map_err(err)?,
        ];
        for _ in 0..r.gen_range(0..4) {
            intervals.push(
                bar.thicken(r.gen_range(1..=32) as f64 / 64.0)
                    .map_err(err)?,
            );
        }
        let extra = r.gen_range(0..12);
        intervals.extend(
            random_pq_domain(&mut r, extra.max(1), false)
                .intervals()
                .map_err(err)?
                .into_iter()
                .take(extra),
        );
        let domain = Domain::from_intervals("d", intervals).map_err(err)?;
        let module = Barcode::single(bar.clone(), mult).map_err(err)?;
        let dgm = mobius_inversion(&gri(&module, &domain).map_err(err)?).map_err(err)?;
        let kept = dgm.domain().intervals().map_err(err)?;
        for (j, v) in kept.iter().zip(dgm.values()) {
            let is_bar = j.contains(&bar) && bar.contains(j);
            let want = if is_bar { mult as i64 } else { 0 };
            if *v != want {
                return Err(format!("case {k}: diagram {v} on {j:?}, expected {want}"));
            }
        }
    }
    Ok("100 modules, diagram is the multiplicity on B and 0 elsewhere".into())
}

fn pseudometric() -> Check {
    let mut r = rng(5);
    let mut slack = f64::INFINITY;
    for k in 0..1000 {
        let doms: Vec<Domain> = (0..3)
            .map(|_| {
                let len = r.gen_range(1..=5);
                if r.gen_bool(0.5) {
                    random_vec6_domain(&mut r, len, false)
                } else {
                    random_pq_domain(&mut r, len, false)
                }
            })
            .collect();
        let mods: Vec<Barcode> = (0..3).map(|_| random_barcode(&mut r, 3)).collect();
        let d = |x: usize, y: usize| dhat(&doms[x], &doms[y]).map_err(err);
        let s = |x: usize, y: usize| {
            sparse_erosion_distance(&mods[x], &doms[x], &mods[y], &doms[y]).map_err(err)
        };
        if d(0, 1)? != d(1, 0)? || s(0, 1)? != s(1, 0)? {
            return Err(format!("case {k}: asymmetric"));
        }
        slack = slack.min(d(0, 1)? + d(1, 2)? - d(0, 2)?);
        slack = slack.min(s(0, 1)? + s(1, 2)? - s(0, 2)?);
        if slack < -1e-9 {
            return Err(format!("case {k}: triangle slack {slack:.3e}"));
        }
    }
    Ok(format!("1000 triples, min triangle slack {slack:.3e}"))
}

fn interleaving_bounds() -> Check {
    let mut r = rng(6);
    for k in 0..500 {
        let (m, n) = (random_barcode(&mut r, 4), random_barcode(&mut r, 4));
        let (a, b) = (r.gen_range(1..=5), r.gen_range(1..=5));
        let (di, dj) = (
            random_pq_domain(&mut r, a, false),
            random_pq_domain(&mut r, b, false),
        );
        let lower = dhat(&di, &dj).map_err(err)?;
        let sed = sparse_erosion_distance(&m, &di, &n, &dj).map_err(err)?;
        if lower > sed {
            return Err(format!("case {k}: dhat {lower} > sed {sed}"));
        }
    }
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let m = random_barcode(&mut r, 4);
        let (a, b) = (r.gen_range(1..=5), r.gen_range(1..=5));
        let (di, dj) = (
            random_pq_domain(&mut r, a, false),
            random_pq_domain(&mut r, b, false),
        );
        let gap = (sparse_erosion_distance(&m, &di, &m, &dj).map_err(err)?
            - dhat(&di, &dj).map_err(err)?)
        .abs();
        worst = worst.max(gap);
    }
    let msg = format!("500 + 500 cases, max |sed - dhat| with equal modules {worst:.3e}");
    if worst <= 1e-12 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn pair_lipschitz() -> Check {
    let mut r = rng(7);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..10_000 {
        let u = real_vec6(&mut r);
        let mut w = u.to_array();
        let scale = if r.gen_bool(0.5) { 1e-3 } else { 0.3 };
        for (k, c) in w.iter_mut().enumerate() {
            *c += r.gen_range(-scale..scale);
            if k >= 2 {
                *c = c.max(0.0);
            }
        }
        let v = IntervalVec6::from_array(w).map_err(err)?;
        let gap = u
            .to_array()
            .iter()
            .zip(&w)
            .fold(0.0f64, |g, (a, b)| g.max((a - b).abs()));
        worst = worst.max(eps_21(&u, &v) - 2.0 * gap);
    }
    let msg = format!("10000 pairs, max eps - 2 gap {worst:.3e}");
    if worst <= 1e-12 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn domain_lipschitz() -> Check {
    let mut r = rng(8);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..300 {
        let n = r.gen_range(1..=6);
        let k_len = r.gen_range(1..=6);
        let k = random_vec6_domain(&mut r, k_len, false);
        let j1 = random_vec6_domain(&mut r, n, false);
        let j2 = if r.gen_bool(0.5) {
            random_vec6_domain(&mut r, n, false)
        } else {
            let coords = j1
                .to_vector()
                .map_err(err)?
                .coords()
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let c = c + r.gen_range(-4..=4) as f64 / 64.0;
                    if i % 6 >= 2 {
                        c.max(0.0)
                    } else {
                        c
                    }
                })
                .collect();
            DomainVector::from_coords(coords)
                .map_err(err)?
                .to_domain("j2")
        };
        let (lhs, rhs) = brute_lipschitz(&k, &j1, &j2).map_err(err)?;
        worst = worst.max(lhs - rhs);
    }
    let msg = format!("300 triples, max lhs - rhs {worst:.3e}");
    if worst <= 0.0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn finite_differences() -> Check {
    let mut r = rng(9);
    let (mut checked, mut tried) = (0, 0);
    let mut worst = 0.0f64;
    while checked < 100 {
        tried += 1;
        if tried > 100_000 {
            return Err(format!("only {checked} strict points found"));
        }
        let n = r.gen_range(2..=6);
        let m = r.gen_range(1..=3);
        let full =
            Domain::from_vec6("f", (0..n).map(|_| real_vec6(&mut r)).collect()).map_err(err)?;
        let coords: Vec<f64> = (0..6 * m)
            .map(|k| {
                if k % 6 < 2 {
                    r.gen()
                } else {
                    r.gen_range(0.05..0.5)
                }
            })
            .collect();
        let v = DomainVector::from_coords(coords.clone()).map_err(err)?;
        let g = build_loss_graph(&full, m).map_err(err)?;
        if g.tie_margin(&v).map_err(err)? <= 1e-4 {
            continue;
        }
        let (_, sub, _) = g.forward_backward(&v).map_err(err)?;
        let f = |c: Vec<f64>| g.forward(&DomainVector::from_coords(c)?);
        for k in 0..coords.len() {
            let (mut up, mut down) = (coords.clone(), coords.clone());
            up[k] += 1e-6;
            down[k] -= 1e-6;
            let fd = (f(up).map_err(err)? - f(down).map_err(err)?) / 2e-6;
            let rel = (fd - sub.coords[k]).abs() / sub.coords[k].abs().max(1.0);
            if rel > 1e-6 {
                return Err(format!(
                    "point {checked}, coord {k}: fd {fd} vs {}",
                    sub.coords[k]
                ));
            }
            worst = worst.max(rel);
        }
        checked += 1;
    }
    Ok(format!(
        "100 strict points ({tried} sampled), max rel err {worst:.3e}"
    ))
}

fn desk_optimization() -> Check {
    let full = grid_domain(&GridSpec::unit(4, 2, SampleRange::new(0.1, 0.5))).map_err(err)?;
    if full.len() != 256 {
        return Err(format!("grid has {} intervals", full.len()));
    }
    let mut improved = 0;
    for seed in 0..10 {
        let cfg = OptimConfig {
            m: 8,
            epochs: 200,
            learning_rate: 0.001,
            momentum: 0.9,
            lr_decay: 0.99,
            seed,
            ..Default::default()
        };
        let res = optimize(&full, &cfg).map_err(err)?;
        let losses = &res.trace.losses;
        let best = res.trace.best_so_far();
        if best.windows(2).any(|w| w[1] > w[0]) {
            return Err(format!("seed {seed}: best-so-far increases"));
        }
        if !losses.windows(2).any(|w| w[1] < w[0]) {
            return Err(format!("seed {seed}: no strictly decreasing step"));
        }
        if res.best_loss < losses[0] {
            improved += 1;
        }
    }
    let msg = format!("n=256, m=8, 200 epochs: {improved}/10 seeds improve");
    if improved >= 9 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn diagonal_shift() -> Check {
    let mut r = rng(11);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..50 {
        let m = random_barcode(&mut r, 4);
        let len = r.gen_range(1..=8);
        let s_dom = if r.gen_bool(0.5) {
            random_vec6_domain(&mut r, len, false)
        } else {
            random_pq_domain(&mut r, len, false)
        };
        for s in [0.1, 0.25, 0.5] {
            let d = sparse_erosion_distance(&m, &s_dom, &m.shifted(s), &s_dom).map_err(err)?;
            worst = worst.max(d - s);
        }
    }
    let msg = format!("50 pairs x 3 shifts, max sed - s {worst:.3e}");
    if worst <= 1e-9 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn cli(args: &[&str], dir: &std::path::Path) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_gpd-sparsify"))
        .args(args)
        .current_dir(dir)
        .output()
        .map_err(err)?;
    if !out.status.success() {
        return Err(format!(
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr).trim()
        ));
    }
    String::from_utf8(out.stdout).map_err(err)
}

fn pipeline() -> Check {
    let dir = tempfile::tempdir().map_err(err)?;
    let p = dir.path();
    cli(
        &["grid", "--nxy", "10", "--nsides", "2", "--out", "full.json"],
        p,
    )?;
    cli(
        &[
            "grid",
            "--nxy",
            "5",
            "--nsides",
            "2",
            "--out",
            "sparse.json",
        ],
        p,
    )?;
    let sizes = (
        io::read_domain(p.join("full.json")).map_err(err)?.len(),
        io::read_domain(p.join("sparse.json")).map_err(err)?.len(),
    );
    if sizes != (1600, 400) {
        return Err(format!("grid sizes {sizes:?}"));
    }

    cli(
        &["grid", "--nxy", "3", "--nsides", "2", "--out", "small.json"],
        p,
    )?;
    let printed: f64 = cli(
        &[
            "optimize",
            "--full",
            "small.json",
            "--m",
            "6",
            "--epochs",
            "60",
            "--seed",
            "1",
            "--out",
            "opt.json",
        ],
        p,
    )?
    .trim()
    .parse()
    .map_err(err)?;
    let measured: f64 = cli(
        &[
            "distance",
            "--domain-a",
            "small.json",
            "--domain-b",
            "opt.json",
        ],
        p,
    )?
    .trim()
    .parse()
    .map_err(err)?;
    let exact = dhat(
        &io::read_domain(p.join("small.json")).map_err(err)?,
        &io::read_domain(p.join("opt.json")).map_err(err)?,
    )
    .map_err(err)?;
    let gap = (printed - measured).abs().max((exact - measured).abs());
    if gap > 1e-12 {
        return Err(format!(
            "optimize reports {printed}, distance {measured}, exact {exact}"
        ));
    }

    let series = [0.5, -1.0, 2.25, 3.0, 0.0, 7.5];
    let pts = time_delay_embed(&series, 3).map_err(err)?;
    let expected: Vec<Vec<f64>> = (0..4)
        .map(|k| vec![series[k], series[k + 1], series[k + 2]])
        .collect();
    if pts != expected {
        return Err(format!("embedding {pts:?}"));
    }
    let pairs = time_delay_embed(&[1.0, 2.0, 4.0], 2).map_err(err)?;
    if pairs != vec![vec![1.0, 2.0], vec![2.0, 4.0]] {
        return Err(format!("embedding {pairs:?}"));
    }
    Ok(format!(
        "grid 1600/400, optimize vs distance gap {gap:.1e}, embedding exact"
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("closed-form equivalence", Some(5), closed_forms),
        ("raster oracle agreement", Some(120), raster_agreement),
        ("inversion round trip", Some(30), mobius_round_trip),
        ("single-bar diagrams", None, single_bar_diagrams),
        ("pseudometric axioms", None, pseudometric),
        ("domain distance bounds", None, interleaving_bounds),
        ("pair distance Lipschitz", None, pair_lipschitz),
        ("domain distance Lipschitz", None, domain_lipschitz),
        (
            "subgradient vs finite differences",
            None,
            finite_differences,
        ),
        ("desk-scale optimization", Some(300), desk_optimization),
        ("diagonal shift bound", None, diagonal_shift),
        ("command-line pipeline", None, pipeline),
    ];
    let mut failed = 0;
    for (k, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let over = limit.is_some_and(|s| took > Duration::from_secs(s));
        let (pass, detail) = match outcome {
            Ok(d) if over => (false, format!("{d}; over the {}s limit", limit.unwrap())),
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        failed += usize::from(!pass);
        println!(
            "criterion {:>2} {}: {} ({detail}; {:.2}s)",
            k + 1,
            if pass { "PASS" } else { "FAIL" },
            name,
            took.as_secs_f64()
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

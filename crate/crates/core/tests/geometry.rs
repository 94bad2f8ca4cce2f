mod common;

use common::fixture;
use dimdoe::geometry::{PiRegion, DEFAULT_TOL};
use dimdoe::pipeline::build_setup;
use dimdoe::rational::to_f64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn region(name: &str) -> PiRegion {
    build_setup(&fixture(name), 2, None).unwrap().region
}

fn random_t(rng: &mut ChaCha8Rng, p: usize) -> Vec<f64> {
    (0..p).map(|_| rng.random_range(-1.0..=1.0)).collect()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Probe points: uniform in the scaled cube, region images, and images
/// pushed slightly outward.
fn probes(r: &PiRegion, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = r.q();
    (0..n)
        .map(|i| match i % 3 {
            0 => (0..q).map(|_| rng.random_range(-1.0..=1.0)).collect(),
            1 => r.scaled_from_t(&random_t(&mut rng, r.p())),
            _ => {
                let t: Vec<f64> = (0..r.p()).map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 }).collect();
                let s = r.scaled_from_t(&t);
                s.iter().map(|x| x * (1.0 + rng.random_range(-0.05..0.05))).collect()
            }
        })
        .collect()
}

#[test]
fn membership_agrees_with_backsolve_residual() {
    for name in ["pump", "heat-exchanger"] {
        let r = region(name);
        for s in probes(&r, 1000, 11) {
            let b = r.backsolve_scaled(&s);
            let inside = r.contains_scaled(&s, DEFAULT_TOL).unwrap();
            assert_eq!(inside, b.residual <= DEFAULT_TOL, "{name}: {s:?}");
            let fast = r.contains_scaled_fast(&s, DEFAULT_TOL).unwrap();
            if b.residual > 1e-6 || b.residual == 0.0 {
                assert_eq!(fast, inside, "{name}: {s:?} residual {}", b.residual);
            }
            let image = r.map_point(&b.v).unwrap().scaled;
            assert!((dist(&image, &s) - b.residual).abs() < 1e-7, "{name}");
            if inside {
                assert!(dist(&image, &s) < 1e-7);
            }
        }
    }
}

fn cross(o: &[f64], a: &[f64], b: &[f64]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Counter-clockwise convex hull by the monotone chain.
fn hull(mut pts: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut lower: Vec<Vec<f64>> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<Vec<f64>> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

#[test]
fn planar_membership_matches_vertex_hull() {
    let r = region("pump");
    assert_eq!(r.q(), 2);
    let scaled: Vec<Vec<f64>> = r.vertices().iter().map(|v| r.scaling().scale(v)).collect();
    let h = hull(scaled);
    let mut checked = 0;
    for s in probes(&r, 3000, 5) {
        let margins: Vec<f64> = (0..h.len()).map(|i| cross(&h[i], &h[(i + 1) % h.len()], &s)).collect();
        let min = margins.iter().cloned().fold(f64::INFINITY, f64::min);
        if min.abs() < 1e-6 {
            continue;
        }
        checked += 1;
        assert_eq!(r.contains_scaled(&s, DEFAULT_TOL).unwrap(), min > 0.0, "{s:?}");
        assert_eq!(r.contains_scaled_fast(&s, DEFAULT_TOL).unwrap(), min > 0.0, "{s:?}");
    }
    assert!(checked > 2500);
}

#[test]
fn region_is_convex() {
    for name in ["pump", "heat-exchanger"] {
        let r = region(name);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..300 {
            let a = r.scaled_from_t(&random_t(&mut rng, r.p()));
            let b = r.scaled_from_t(&random_t(&mut rng, r.p()));
            let l: f64 = rng.random_range(0.0..=1.0);
            let m: Vec<f64> = a.iter().zip(&b).map(|(x, y)| l * x + (1.0 - l) * y).collect();
            assert!(r.contains_scaled(&m, DEFAULT_TOL).unwrap(), "{name}");
        }
    }
}

#[test]
fn bounding_box_is_exact() {
    for name in ["pump", "heat-exchanger"] {
        let r = region(name);
        let (lo, hi) = r.bounding_box();
        let (llo, lhi) = (r.factor_box.log_lo(), r.factor_box.log_hi());
        for j in 0..r.q() {
            let mut want_lo = r.map.c[j];
            let mut want_hi = r.map.c[j];
            for i in 0..r.p() {
                let (a, b) = (r.map.u[(j, i)] * llo[i], r.map.u[(j, i)] * lhi[i]);
                want_lo += a.min(b);
                want_hi += a.max(b);
            }
            assert!((lo[j] - want_lo).abs() <= 1e-12 * want_lo.abs().max(1.0), "{name}");
            assert!((hi[j] - want_hi).abs() <= 1e-12 * want_hi.abs().max(1.0), "{name}");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut seen_lo = vec![f64::INFINITY; r.q()];
        let mut seen_hi = vec![f64::NEG_INFINITY; r.q()];
        for _ in 0..100_000 {
            let s = r.scaled_from_t(&random_t(&mut rng, r.p()));
            for j in 0..r.q() {
                assert!(s[j].abs() <= 1.0 + 1e-12, "{name}");
                seen_lo[j] = seen_lo[j].min(s[j]);
                seen_hi[j] = seen_hi[j].max(s[j]);
            }
        }
        let verts: Vec<Vec<f64>> = r.vertices().iter().map(|v| r.scaling().scale(v)).collect();
        for j in 0..r.q() {
            let vmin = verts.iter().map(|v| v[j]).fold(f64::INFINITY, f64::min);
            let vmax = verts.iter().map(|v| v[j]).fold(f64::NEG_INFINITY, f64::max);
            assert!((vmin + 1.0).abs() < 1e-12 && (vmax - 1.0).abs() < 1e-12, "{name}");
            assert!(seen_lo[j] >= vmin && seen_hi[j] <= vmax);
        }
    }
}

#[test]
fn vertex_counts() {
    assert_eq!(region("pump").vertices().len(), 8);
    assert_eq!(region("heat-exchanger").vertices().len(), 512);
    assert_eq!(region("mars").vertices().len(), 2);
}

#[test]
fn log_map_matches_direct_monomials() {
    for name in ["pump", "heat-exchanger"] {
        let loaded = fixture(name);
        let setup = build_setup(&loaded, 2, None).unwrap();
        let r = &setup.region;
        let problem = &loaded.problem;
        let explanatory: Vec<usize> = problem
            .quantities
            .iter()
            .enumerate()
            .filter(|(_, q)| q.range.is_some())
            .map(|(i, _)| i)
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..200 {
            let v: Vec<f64> = (0..r.p())
                .map(|i| rng.random_range(r.factor_box.lo[i]..=r.factor_box.hi[i]))
                .collect();
            let mapped = r.map_point(&v).unwrap();
            for (j, g) in setup.groups.iter().enumerate() {
                let mut direct = 1.0;
                for (qi, q) in problem.quantities.iter().enumerate() {
                    let e = to_f64(&g.exponents[qi]);
                    if e == 0.0 {
                        continue;
                    }
                    let x = match explanatory.iter().position(|&k| k == qi) {
                        Some(pos) => v[pos],
                        None => q.value.unwrap(),
                    };
                    direct *= x.powf(e);
                }
                assert!(((mapped.pi[j] - direct) / direct).abs() < 1e-12, "{name} {}", g.name);
            }
        }
    }
}

/// Projected gradient on `min ‖A t + b0 − s‖` over `[-1,1]^p`, best of several starts.
fn projected_gradient(r: &PiRegion, s: &[f64], starts: usize, seed: u64) -> f64 {
    let p = r.p();
    let cols: Vec<Vec<f64>> = (0..p).map(|i| r.scaled_column(i)).collect();
    let lip: f64 = cols.iter().flatten().map(|x| x * x).sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::INFINITY;
    for _ in 0..starts {
        let mut t = random_t(&mut rng, p);
        for _ in 0..20_000 {
            let img = r.scaled_from_t(&t);
            let res: Vec<f64> = img.iter().zip(s).map(|(a, b)| a - b).collect();
            for i in 0..p {
                let g: f64 = cols[i].iter().zip(&res).map(|(a, b)| a * b).sum();
                t[i] = (t[i] - g / lip).clamp(-1.0, 1.0);
            }
        }
        best = best.min(dist(&r.scaled_from_t(&t), s));
    }
    best
}

#[test]
fn far_targets_backsolve_to_the_nearest_point() {
    for name in ["pump", "heat-exchanger"] {
        let r = region(name);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..5 {
            let s: Vec<f64> = (0..r.q()).map(|_| rng.random_range(-3.0..=3.0)).collect();
            let b = r.backsolve_scaled(&s);
            let pg = projected_gradient(&r, &s, 10, 9);
            assert!(b.residual <= pg + 1e-8, "{name}: {} vs {pg}", b.residual);
            assert!(pg - b.residual < 1e-4, "{name}: {} vs {pg}", b.residual);
        }
    }
}

#[test]
fn scaled_corner_outside_is_confirmed_by_sampling() {
    for name in ["pump", "heat-exchanger"] {
        let r = region(name);
        let corner = vec![1.0; r.q()];
        let b = r.backsolve_scaled(&corner);
        assert!(b.residual > 10.0 * DEFAULT_TOL, "{name}");
        assert!(!r.contains_scaled(&corner, DEFAULT_TOL).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut nearest = f64::INFINITY;
        for _ in 0..200_000 {
            let mut t = random_t(&mut rng, r.p());
            // Half the samples on the box surface, where the nearest point lies.
            if rng.random_bool(0.5) {
                let k = rng.random_range(0..r.p());
                t[k] = t[k].signum();
            }
            nearest = nearest.min(dist(&r.scaled_from_t(&t), &corner));
        }
        assert!(nearest >= b.residual - 1e-12, "{name}");
        assert!(nearest - b.residual < 0.1, "{name}: sampled {nearest}, solved {}", b.residual);
    }
}

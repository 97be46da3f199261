//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::collections::VecDeque;
use std::time::Instant;

use polarcut::metrics::{summarize, voxels_to_cm3, CaseStats, CSV_HEADER};
use polarcut::spheregraph::{build_graph, build_icosphere, node_weights};
use polarcut::surface::extract_boundary;
use polarcut::volume::{generate_phantom, mean_gray_at_points, Lobe, PhantomShape};
use polarcut::{
    dsc, max_flow, segment, volume_cm3, BinaryMask, FlowNetwork, GraphParams, PhantomSpec,
    Polyhedron, RayGrid, SeedSet, Vec3, Vertex, Volume,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("max-flow oracle", max_flow_oracle),
        ("closed-set structure", closed_set_structure),
        ("phantom one-click", phantom_one_click),
        ("constraint exactness", constraint_exactness),
        ("semi >= one-click", semi_vs_one_click),
        ("performance", performance),
        ("cube mean oracle", cube_mean_oracle),
        ("dsc/volume metrics", metrics_checks),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let o = run();
        println!(
            "{} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

fn max_flow_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let start = Instant::now();
    let mut agree = 0;
    for _ in 0..500 {
        let n = rng.random_range(1..=8usize);
        let m = rng.random_range(0..=3 * n + 6);
        let mut arcs = Vec::with_capacity(m);
        while arcs.len() < m {
            let (a, b) = (rng.random_range(0..n + 2), rng.random_range(0..n + 2));
            // n is the source and n + 1 the sink.
            if a != b && b != n && a != n + 1 {
                arcs.push((a, b, rng.random_range(0..=10u32)));
            }
        }
        let vertex = |i: usize| match i {
            i if i == n => Vertex::Source,
            i if i == n + 1 => Vertex::Sink,
            i => Vertex::Node(i as u32),
        };
        let mut net = FlowNetwork::new(n);
        for &(a, b, c) in &arcs {
            net.add_arc(vertex(a), vertex(b), c as f64).unwrap();
        }
        let best = (0u32..1 << n)
            .map(|bits| {
                let src = |v: usize| v == n || (v < n && bits >> v & 1 == 1);
                let snk = |v: usize| v == n + 1 || (v < n && bits >> v & 1 == 0);
                arcs.iter()
                    .filter(|a| src(a.0) && snk(a.1))
                    .map(|a| a.2 as u64)
                    .sum::<u64>()
            })
            .min()
            .unwrap();
        if max_flow(&net).max_flow_value == best as f64 {
            agree += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        agree == 500 && secs < 5.0,
        format!("{agree}/500 exact, {secs:.2} s"),
    )
}

/// Cheapest boundary field by exhaustive search over every field that
/// satisfies the smoothness bound, pruned by a per-ray lower bound.
fn brute_force_field(w: &[Vec<f64>], poly: &Polyhedron, delta: usize) -> (f64, Vec<usize>) {
    let rays = w.len();
    // prefix[r][b] = cost of keeping samples 1..=b of ray r inside.
    let prefix: Vec<Vec<f64>> = w
        .iter()
        .map(|ray| {
            let mut acc = vec![0.0];
            for &x in &ray[1..] {
                acc.push(acc.last().unwrap() + x);
            }
            acc
        })
        .collect();
    let ray_min: Vec<f64> = prefix
        .iter()
        .map(|p| p.iter().copied().fold(f64::INFINITY, f64::min))
        .collect();
    let mut rest = vec![0.0; rays + 1];
    for r in (0..rays).rev() {
        rest[r] = rest[r + 1] + ray_min[r];
    }
    struct Search<'a> {
        prefix: &'a [Vec<f64>],
        rest: &'a [f64],
        poly: &'a Polyhedron,
        delta: usize,
        field: Vec<usize>,
        best: (f64, Vec<usize>),
    }
    fn go(s: &mut Search, r: usize, cost: f64) {
        if r == s.field.len() {
            if cost < s.best.0 {
                s.best = (cost, s.field.clone());
            }
            return;
        }
        if cost + s.rest[r] >= s.best.0 {
            return;
        }
        for b in 0..s.prefix[r].len() {
            let ok = s
                .poly
                .neighbors(r)
                .iter()
                .all(|&q| q > r || s.field[q].abs_diff(b) <= s.delta);
            if ok {
                s.field[r] = b;
                go(s, r + 1, cost + s.prefix[r][b]);
            }
        }
    }
    let mut s = Search {
        prefix: &prefix,
        rest: &rest,
        poly,
        delta,
        field: vec![0; rays],
        best: (f64::INFINITY, Vec::new()),
    };
    go(&mut s, 0, 0.0);
    s.best
}

fn field_cost(w: &[Vec<f64>], field: &[usize]) -> f64 {
    field
        .iter()
        .enumerate()
        .map(|(r, &b)| w[r][1..=b].iter().sum::<f64>())
        .sum()
}

fn closed_set_structure() -> Outcome {
    let poly = build_icosphere(0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut ok, mut worst) = (0, 0.0f64);
    for trial in 0..50 {
        let delta = 1 + trial % 2;
        let values: Vec<f64> = (0..60).map(|_| rng.random_range(0..=100) as f64).collect();
        let mean = rng.random_range(0..=100) as f64;
        let grid =
            RayGrid::from_intensities(Vec3::ZERO, poly.directions().to_vec(), 5, 1.0, values)
                .unwrap();
        let params = GraphParams {
            smoothness: delta,
            ..GraphParams::default()
        };
        let graph = build_graph(&grid, &poly, mean, &params).unwrap();
        let cut = max_flow(graph.network());
        let Ok(field) = extract_boundary(&grid, &cut) else {
            continue;
        };
        let smooth = field.max_neighbor_jump(&poly) <= delta;

        let flat = node_weights(&grid, mean);
        let w: Vec<Vec<f64>> = flat.chunks(5).map(|c| c.to_vec()).collect();
        let (best, _) = brute_force_field(&w, &poly, delta);
        // Both costs are summed in the same order, so an optimal field
        // reproduces the enumerated minimum bit for bit.
        let got = field_cost(&w, field.indices());
        worst = worst.max((got - best).abs());
        if smooth && got == best {
            ok += 1;
        }
    }
    outcome(
        ok == 50,
        format!("{ok}/50 grids optimal, monotone and smooth (max |cost diff| {worst:e})"),
    )
}

fn phantom_one_click() -> Outcome {
    let center = Vec3::new(32.0, 32.0, 32.0);
    let params = GraphParams {
        level: 2,
        ..GraphParams::default()
    };
    let mut parts = Vec::new();
    let mut pass = true;
    for (sigma, floor) in [(0.0, 0.95), (10.0, 0.90)] {
        let mut spec = PhantomSpec::sphere([64; 3], [1.0; 3], center, 10.0);
        spec.noise_sigma = sigma;
        spec.rng_seed = 42;
        let (vol, truth) = generate_phantom(&spec).unwrap();
        let start = Instant::now();
        let out = segment(&vol, &SeedSet::one_click(&vol, center).unwrap(), &params).unwrap();
        let secs = start.elapsed().as_secs_f64();
        let d = dsc(&out.mask, &truth).unwrap();
        pass &= d >= floor && secs < 10.0;
        parts.push(format!(
            "sigma {sigma}: DSC {d:.4} (>= {floor}) in {secs:.3} s"
        ));
    }
    outcome(pass, parts.join("; "))
}

fn constraint_exactness() -> Outcome {
    let center = Vec3::new(32.0, 32.0, 32.0);
    let mut spec = PhantomSpec::sphere([64; 3], [1.0; 3], center, 10.0);
    spec.noise_sigma = 10.0;
    let (vol, _) = generate_phantom(&spec).unwrap();
    let params = GraphParams {
        level: 2,
        samples: 40,
        ..GraphParams::default()
    };
    let one = segment(&vol, &SeedSet::one_click(&vol, center).unwrap(), &params).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut exact = 0;
    for _ in 0..100 {
        let ray = rng.random_range(0..one.grid.rays());
        let sample = rng.random_range(0..params.samples);
        let seed = one.grid.position(ray, sample);
        let seeds = SeedSet::new(&vol, center, vec![seed]).unwrap();
        if let Ok(out) = segment(&vol, &seeds, &params) {
            exact += usize::from(out.boundary.indices()[ray] == sample);
        }
    }
    outcome(
        exact == 100,
        format!("{exact}/100 pinned rays end exactly at k*"),
    )
}

fn hops(poly: &Polyhedron, from: usize) -> Vec<usize> {
    let mut d = vec![usize::MAX; poly.len()];
    d[from] = 0;
    let mut queue = VecDeque::from([from]);
    while let Some(x) = queue.pop_front() {
        for &n in poly.neighbors(x) {
            if d[n] == usize::MAX {
                d[n] = d[x] + 1;
                queue.push_back(n);
            }
        }
    }
    d
}

fn semi_vs_one_click() -> Outcome {
    let center = Vec3::new(32.0, 32.0, 32.0);
    let axes = [
        [1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, -1.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0],
    ];
    let shape = PhantomShape::Lobed {
        center,
        base_radius: 9.0,
        lobes: axes
            .iter()
            .map(|&a| Lobe {
                direction: Vec3::from(a),
                amplitude: 8.0,
                frequency: 2.0,
            })
            .collect(),
    };
    let spec = PhantomSpec {
        dims: [64; 3],
        spacing: [1.0; 3],
        object: shape.clone(),
        foreground_mean: 100.0,
        background_mean: 0.0,
        noise_sigma: 10.0,
        rng_seed: 5,
    };
    let (vol, truth) = generate_phantom(&spec).unwrap();
    let params = GraphParams {
        level: 2,
        ..GraphParams::default()
    };
    let one = segment(&vol, &SeedSet::one_click(&vol, center).unwrap(), &params).unwrap();
    let base = dsc(&one.mask, &truth).unwrap();
    let poly = &one.polyhedron;

    // Corrective clicks go where the one-click border misses the object by
    // more than a voxel, at least three rays apart, on the true surface.
    let missed: Vec<usize> = (0..poly.len())
        .filter(|&r| {
            (one.boundary.radius(r) - shape.radius_towards(poly.directions()[r])).abs() > 1.0
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut raised, mut floor_ok, mut lowest) = (0, true, f64::INFINITY);
    for _ in 0..20 {
        let want = rng.random_range(5..=15);
        let mut order = missed.clone();
        order.shuffle(&mut rng);
        let mut chosen: Vec<usize> = Vec::new();
        for r in order {
            if chosen.len() == want {
                break;
            }
            let d = hops(poly, r);
            if chosen.iter().all(|&q| d[q] >= 3) {
                chosen.push(r);
            }
        }
        let extras = chosen
            .iter()
            .map(|&r| {
                let u = poly.directions()[r];
                center + u * shape.radius_towards(u)
            })
            .collect();
        let seeds = SeedSet::new(&vol, center, extras).unwrap();
        match segment(&vol, &seeds, &params) {
            Ok(out) => {
                let d = dsc(&out.mask, &truth).unwrap();
                raised += usize::from(d > base);
                floor_ok &= d >= base - 0.01;
                lowest = lowest.min(d);
            }
            Err(_) => floor_ok = false,
        }
    }
    outcome(
        base < 0.9 && raised >= 18 && floor_ok,
        format!(
            "one-click DSC {base:.4}; raised in {raised}/20 trials; lowest semi DSC {lowest:.4}"
        ),
    )
}

fn performance() -> Outcome {
    let center = Vec3::new(32.0, 32.0, 32.0);
    let mut spec = PhantomSpec::sphere([64; 3], [1.0; 3], center, 10.0);
    spec.noise_sigma = 10.0;
    let (vol, _) = generate_phantom(&spec).unwrap();
    let params = GraphParams::default();
    let start = Instant::now();
    let out = segment(&vol, &SeedSet::one_click(&vol, center).unwrap(), &params).unwrap();
    let wall = start.elapsed().as_secs_f64();
    let t = out.timings;
    outcome(
        wall < 30.0 && out.stats.rays == 2562 && out.stats.samples == 60,
        format!(
            "{} rays x {} samples in {wall:.2} s (sampling {:.3}, graph {:.3}, max-flow {:.3}, rasterize {:.3})",
            out.stats.rays, out.stats.samples, t.sampling_s, t.graph_build_s, t.max_flow_s, t.rasterize_s
        ),
    )
}

fn cube_mean_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut exact = 0;
    for _ in 0..100 {
        let dims = [
            rng.random_range(3..10),
            rng.random_range(3..10),
            rng.random_range(3..10),
        ];
        let spacing = [0.5, 1.0, 1.5].map(|_| [0.5, 1.0, 1.5, 2.0][rng.random_range(0..4)]);
        let n: usize = dims.iter().product();
        let data: Vec<f32> = (0..n).map(|_| rng.random_range(0..1000) as f32).collect();
        let vol = Volume::new(dims, spacing, data).unwrap();
        let d = rng.random_range(1..=5usize);
        let seeds: Vec<Vec3> = (0..rng.random_range(1..=4))
            .map(|_| {
                let u: [f64; 3] =
                    std::array::from_fn(|a| rng.random_range(0..=(dims[a] - 1) * 4) as f64 / 4.0);
                Vec3::new(u[0] * spacing[0], u[1] * spacing[1], u[2] * spacing[2])
            })
            .collect();

        let half = d as f64 / 2.0;
        let mut total = 0.0;
        for p in &seeds {
            let u = [p.x / spacing[0], p.y / spacing[1], p.z / spacing[2]];
            let (mut sum, mut count) = (0.0, 0usize);
            for k in 0..dims[2] {
                for j in 0..dims[1] {
                    for i in 0..dims[0] {
                        let c = [i as f64, j as f64, k as f64];
                        if (0..3).all(|a| u[a] - half <= c[a] && c[a] < u[a] + half) {
                            sum += vol.get(i, j, k) as f64;
                            count += 1;
                        }
                    }
                }
            }
            total += sum / count as f64;
        }
        let expected = total / seeds.len() as f64;
        if mean_gray_at_points(&vol, &seeds, d).unwrap() == expected {
            exact += 1;
        }
    }
    outcome(
        exact == 100,
        format!("{exact}/100 configurations bit-identical"),
    )
}

fn metrics_checks() -> Outcome {
    let dims = [10, 10, 10];
    let mask_of = |range: std::ops::Range<usize>| {
        let bits = (0..1000).map(|i| range.contains(&i)).collect();
        BinaryMask::from_bits(dims, [1.0; 3], bits).unwrap()
    };
    let a = mask_of(0..100);
    let r = mask_of(20..120);
    let mut checks = vec![
        ("overlap 80 of 100/100", dsc(&a, &r).unwrap() == 0.8),
        ("identical", dsc(&a, &a).unwrap() == 1.0),
        ("disjoint", dsc(&a, &mask_of(500..600)).unwrap() == 0.0),
        (
            "both empty",
            dsc(&mask_of(0..0), &mask_of(0..0)).unwrap() == 1.0,
        ),
        ("empty volume", volume_cm3(&mask_of(0..0)) == 0.0),
        ("1000 voxels = 1 cm3", volume_cm3(&mask_of(0..1000)) == 1.0),
        ("symmetric", dsc(&r, &a).unwrap() == dsc(&a, &r).unwrap()),
    ];

    let case = |id: &str, v: f64| {
        let mut c = CaseStats::from_masks(id, &a, &a, &r).unwrap();
        c.dsc_oneclick = v;
        c
    };
    let single = summarize(&[case("a", 0.5)]).unwrap();
    let s1 = single.column("dsc_oneclick").unwrap();
    checks.push((
        "single case",
        s1.min == s1.max && s1.max == s1.mean && s1.std == 0.0,
    ));
    let pair = summarize(&[case("a", 0.6), case("b", 0.8)]).unwrap();
    let s2 = pair.column("dsc_oneclick").unwrap();
    checks.push((
        "0.6/0.8 -> 0.7 +- 0.1",
        (s2.mean - 0.7).abs() < 1e-12 && (s2.std - 0.1).abs() < 1e-12,
    ));
    checks.push((
        "csv columns",
        CSV_HEADER == "case,vol_manual_cm3,vol_oneclick_cm3,vol_semi_cm3,vox_manual,vox_oneclick,vox_semi,dsc_oneclick,dsc_semi",
    ));

    let implied_mm3: f64 = 2.38 * 1000.0 / 2694.0;
    let edge = implied_mm3.cbrt();
    let back = voxels_to_cm3(2694, [edge; 3]);
    checks.push((
        "table row 2.38 cm3 / 2694 voxels",
        (implied_mm3 - 0.883).abs() / 0.883 < 0.01 && (back - 2.38).abs() / 2.38 < 0.01,
    ));

    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    let detail = if failed.is_empty() {
        format!(
            "{} checks, implied voxel {implied_mm3:.4} mm3",
            checks.len()
        )
    } else {
        format!("failed: {}", failed.join(", "))
    };
    outcome(failed.is_empty(), detail)
}

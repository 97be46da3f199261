use super::{GraphParams, RayConstraint, RayGrid};
use crate::error::{Error, Result};
use crate::mincut::{FlowNetwork, Vertex};
use crate::spheregraph::Polyhedron;

/// Distance of a sample intensity from the object gray value.
pub fn node_cost(intensity: f64, mean_gray: f64) -> f64 {
    (intensity - mean_gray).abs()
}

/// Otsu split of `values`: the threshold maximising the between-class
/// variance, returned as the smallest value of the upper class together with
/// the lower and upper class means. `None` when the values do not split.
pub fn otsu_split(values: &[f64]) -> Option<OtsuSplit> {
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let total: f64 = sorted.iter().sum();
    let mut below = 0.0;
    let mut best: Option<(f64, OtsuSplit)> = None;
    for i in 1..n {
        below += sorted[i - 1];
        if sorted[i] == sorted[i - 1] {
            continue;
        }
        let (n0, n1) = (i as f64, (n - i) as f64);
        let (m0, m1) = (below / n0, (total - below) / n1);
        let between = n0 * n1 * (m1 - m0) * (m1 - m0);
        if best.as_ref().is_none_or(|(b, _)| between > *b) {
            let split = OtsuSplit {
                threshold: sorted[i],
                lower_mean: m0,
                upper_mean: m1,
            };
            best = Some((between, split));
        }
    }
    best.map(|(_, split)| split)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OtsuSplit {
    pub threshold: f64,
    pub lower_mean: f64,
    pub upper_mean: f64,
}

/// Gray value of the region surrounding the object, estimated from the
/// grid itself: the Otsu classes of the non-base samples are computed and
/// the class on the opposite side from the base ring (which is inside by
/// construction) is taken as background. `None` for a grid that does not
/// split into two classes.
pub fn background_gray(grid: &RayGrid) -> Option<f64> {
    let k_max = grid.samples();
    let upper: Vec<f64> = (0..grid.rays())
        .flat_map(|r| (1..k_max).map(move |k| grid.intensity(r, k)))
        .collect();
    let split = otsu_split(&upper)?;
    let mut base: Vec<f64> = (0..grid.rays()).map(|r| grid.intensity(r, 0)).collect();
    base.sort_by(f64::total_cmp);
    let base_median = base[base.len() / 2];
    Some(if base_median >= split.threshold {
        split.lower_mean
    } else {
        split.upper_mean
    })
}

/// Closed-set weight of every node, ray-major: the object cost
/// `|I - mean_gray|` minus the background cost `|I - background|`, so a
/// sample pays to be excluded exactly when it looks more like the seeds
/// than like the surroundings. Base nodes (`k = 0`) carry 0 here; the graph
/// forces them to the source side. A grid without a background class gets
/// all-zero weights.
pub fn node_weights(grid: &RayGrid, mean_gray: f64) -> Vec<f64> {
    let k_max = grid.samples();
    let mut w = vec![0.0; grid.rays() * k_max];
    let Some(background) = background_gray(grid) else {
        return w;
    };
    for r in 0..grid.rays() {
        for k in 1..k_max {
            let v = grid.intensity(r, k);
            w[grid.node_index(r, k)] = node_cost(v, mean_gray) - node_cost(v, background);
        }
    }
    w
}

/// Flow network over a [`RayGrid`] plus the bookkeeping needed to add
/// fixed-ray constraints.
#[derive(Debug, Clone)]
pub struct SurfaceGraph {
    network: FlowNetwork,
    rays: usize,
    samples: usize,
    smoothness: usize,
    max_weight: f64,
    fixed: Vec<Option<usize>>,
}

impl SurfaceGraph {
    pub fn network(&self) -> &FlowNetwork {
        &self.network
    }

    pub fn into_network(self) -> FlowNetwork {
        self.network
    }

    pub fn rays(&self) -> usize {
        self.rays
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn smoothness(&self) -> usize {
        self.smoothness
    }

    /// Capacity standing in for infinity: one more than the sum of all
    /// finite terminal capacities.
    pub fn max_weight(&self) -> f64 {
        self.max_weight
    }

    /// Node count including source and sink.
    pub fn total_nodes(&self) -> usize {
        self.network.node_count() + 2
    }

    pub fn fixed(&self) -> &[Option<usize>] {
        &self.fixed
    }

    fn node(&self, ray: usize, sample: usize) -> Vertex {
        Vertex::Node((ray * self.samples + sample) as u32)
    }

    /// Pins the boundary of `c.ray` at `c.sample`: samples up to and
    /// including it are bound to the source, later ones to the sink.
    pub fn fix_ray(&mut self, c: RayConstraint) -> Result<()> {
        if c.ray >= self.rays || c.sample >= self.samples {
            return Err(Error::InvalidParams(format!(
                "constraint ({}, {}) outside {}x{} grid",
                c.ray, c.sample, self.rays, self.samples
            )));
        }
        match self.fixed[c.ray] {
            Some(existing) if existing == c.sample => return Ok(()),
            Some(existing) => {
                return Err(Error::ConflictingConstraint {
                    ray: c.ray,
                    existing,
                    requested: c.sample,
                })
            }
            None => {}
        }
        for k in 0..self.samples {
            let v = self.node(c.ray, k);
            if k <= c.sample {
                self.network.add_arc(Vertex::Source, v, self.max_weight)?;
            } else {
                self.network.add_arc(v, Vertex::Sink, self.max_weight)?;
            }
        }
        self.fixed[c.ray] = Some(c.sample);
        Ok(())
    }
}

/// Builds the network whose minimum cut is the optimal boundary field.
///
/// Per node `(r, k)`, in ray-then-sample order:
/// * one terminal arc: weight `w < 0` gives `s -> node` with capacity `-w`,
///   otherwise `node -> t` with capacity `w`; base nodes get `-MAXW`;
/// * for `k >= 1`, `(r, k) -> (r, k - 1)` with capacity `MAXW`;
/// * for every neighbour `r'`, `(r, k) -> (r', max(0, k - smoothness))` with
///   capacity `MAXW`.
pub fn build_graph(
    grid: &RayGrid,
    poly: &Polyhedron,
    mean_gray: f64,
    params: &GraphParams,
) -> Result<SurfaceGraph> {
    let rays = grid.rays();
    let samples = grid.samples();
    if poly.len() != rays {
        return Err(Error::InvalidParams(format!(
            "polyhedron has {} directions, grid has {rays} rays",
            poly.len()
        )));
    }
    if samples < 2 || params.smoothness > samples - 1 {
        return Err(Error::InvalidParams(format!(
            "smoothness {} invalid for {samples} samples",
            params.smoothness
        )));
    }
    let weights = node_weights(grid, mean_gray);
    let max_weight = 1.0
        + (0..rays)
            .flat_map(|r| (1..samples).map(move |k| (r, k)))
            .map(|(r, k)| weights[r * samples + k].abs())
            .sum::<f64>();

    let arc_estimate = rays * samples * 2 + poly.edges().len() * 2 * samples;
    let mut network = FlowNetwork::with_capacity(rays * samples, arc_estimate);
    for r in 0..rays {
        for k in 0..samples {
            let id = (r * samples + k) as u32;
            let v = Vertex::Node(id);
            let w = if k == 0 {
                -max_weight
            } else {
                weights[id as usize]
            };
            if w < 0.0 {
                network.add_arc(Vertex::Source, v, -w)?;
            } else {
                network.add_arc(v, Vertex::Sink, w)?;
            }
            if k >= 1 {
                network.add_edge(id, id - 1, max_weight)?;
            }
            let lower = k.saturating_sub(params.smoothness);
            for &nb in poly.neighbors(r) {
                network.add_edge(id, (nb * samples + lower) as u32, max_weight)?;
            }
        }
    }

    Ok(SurfaceGraph {
        network,
        rays,
        samples,
        smoothness: params.smoothness,
        max_weight,
        fixed: vec![None; rays],
    })
}

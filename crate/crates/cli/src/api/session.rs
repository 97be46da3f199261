use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use polarcut::pipeline::SegmentStats;
use polarcut::{
    dsc, segment, BinaryMask, GraphParams, SeedSet, SliceContours, Timings, TriangleMesh, Vec3,
    Volume,
};
use serde::{Deserialize, Serialize};

use super::ApiError;

/// Body of `POST /session/{id}/segment`.
#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentRequest {
    pub seed: [f64; 3],
    #[serde(default)]
    pub extra_seeds: Vec<[f64; 3]>,
    #[serde(default)]
    pub params: GraphParams,
    /// Interpret seeds as continuous voxel indices instead of millimeters.
    #[serde(default)]
    pub voxel_coords: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SegmentResponse {
    pub generation: u64,
    pub contours: Vec<SliceContours>,
    pub stats: SegmentStats,
    pub timings: Timings,
    pub dsc: Option<f64>,
}

/// Everything kept from one finished run.
#[derive(Debug)]
pub struct JobResult {
    pub response: SegmentResponse,
    pub mask: BinaryMask,
    pub mesh: TriangleMesh,
    pub extra_seeds: usize,
}

#[derive(Debug, Default)]
struct Results {
    latest: Option<Arc<JobResult>>,
    latest_one_click: Option<Arc<JobResult>>,
}

/// One loaded volume and its segmentation history. Requests against the
/// same session run one at a time; when several are waiting only the most
/// recent one runs.
#[derive(Debug)]
pub struct Session {
    pub id: String,
    pub volume: Arc<Volume>,
    pub reference: Option<BinaryMask>,
    ticket: AtomicU64,
    generation: AtomicU64,
    run_lock: tokio::sync::Mutex<()>,
    results: Mutex<Results>,
}

impl Session {
    pub fn new(id: String, volume: Volume, reference: Option<BinaryMask>) -> Self {
        Session {
            id,
            volume: Arc::new(volume),
            reference,
            ticket: AtomicU64::new(0),
            generation: AtomicU64::new(0),
            run_lock: tokio::sync::Mutex::new(()),
            results: Mutex::new(Results::default()),
        }
    }

    pub fn latest(&self) -> Option<Arc<JobResult>> {
        self.results.lock().expect("results lock").latest.clone()
    }

    /// Latest run without extra seeds, falling back to the latest run.
    pub fn latest_one_click(&self) -> Option<Arc<JobResult>> {
        let r = self.results.lock().expect("results lock");
        r.latest_one_click.clone().or_else(|| r.latest.clone())
    }

    /// Runs `req`, or reports that it was superseded by a newer request that
    /// arrived while it waited. Without queueing a busy session answers 409
    /// straight away.
    pub async fn run(
        self: &Arc<Self>,
        req: SegmentRequest,
        queueing: bool,
    ) -> Result<Arc<JobResult>, ApiError> {
        let ticket = self.ticket.fetch_add(1, Ordering::SeqCst) + 1;
        let _guard = if queueing {
            self.run_lock.lock().await
        } else {
            self.run_lock.try_lock().map_err(|_| {
                ApiError::new(
                    409,
                    "busy",
                    "a segmentation is already running for this session",
                )
            })?
        };
        if self.ticket.load(Ordering::SeqCst) != ticket {
            return Err(ApiError::new(
                409,
                "superseded",
                "a newer segmentation request replaced this one",
            ));
        }
        let session = Arc::clone(self);
        let result = tokio::task::spawn_blocking(move || session.compute(&req))
            .await
            .map_err(|e| ApiError::new(500, "internal", e.to_string()))??;
        let result = Arc::new(result);
        let mut results = self.results.lock().expect("results lock");
        if result.extra_seeds == 0 {
            results.latest_one_click = Some(Arc::clone(&result));
        }
        results.latest = Some(Arc::clone(&result));
        Ok(result)
    }

    fn compute(&self, req: &SegmentRequest) -> Result<JobResult, ApiError> {
        let v = &self.volume;
        let to_mm = |p: [f64; 3]| {
            if req.voxel_coords {
                v.to_world(p)
            } else {
                Vec3::from(p)
            }
        };
        let seeds = SeedSet::new(
            v,
            to_mm(req.seed),
            req.extra_seeds.iter().map(|&p| to_mm(p)).collect(),
        )?;
        let out = segment(v, &seeds, &req.params)?;
        let dsc = match &self.reference {
            Some(r) => Some(dsc(&out.mask, r)?),
            None => None,
        };
        let response = SegmentResponse {
            generation: self.generation.fetch_add(1, Ordering::SeqCst) + 1,
            contours: out.contours(v),
            stats: out.stats,
            timings: out.timings,
            dsc,
        };
        Ok(JobResult {
            response,
            mask: out.mask,
            mesh: out.mesh,
            extra_seeds: seeds.extras().len(),
        })
    }
}

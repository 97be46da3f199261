//! The batch subcommands. Each returns a serializable report that `main`
//! prints; failures come back as [`CliError`].

use std::fs::OpenOptions;
use std::path::{Path, PathBuf};
use std::time::Instant;

use polarcut::metrics::{summarize, CaseStats, Summary};
use polarcut::pipeline::SegmentStats;
use polarcut::volume::{generate_phantom, load_volume};
use polarcut::{
    dsc, segment, volume_cm3, BinaryMask, GraphParams, PhantomSpec, SeedSet, Timings, VolumeFormat,
};
use serde::Serialize;

use crate::config::JobConfig;
use crate::error::{CliError, CliResult};

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| {
        CliError::Core(polarcut::Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> CliResult<()> {
    std::fs::write(path, bytes).map_err(io_err(path))
}

#[derive(Debug, Clone, Serialize)]
pub struct SegmentReport {
    pub seed_mm: [f64; 3],
    pub extra_seeds_mm: Vec<[f64; 3]>,
    pub params: GraphParams,
    pub stats: SegmentStats,
    pub timings: Timings,
    /// Wall time of the whole command including I/O.
    pub wall_s: f64,
}

pub fn cmd_segment(config: &Path, voxel_coords: bool) -> CliResult<SegmentReport> {
    let start = Instant::now();
    let job = JobConfig::load(config)?;
    let volume = load_volume(&job.input, VolumeFormat::from_path(&job.input))?;
    let (primary, extras) = job.seeds_mm(&volume, voxel_coords);
    let seeds = SeedSet::new(&volume, primary, extras)?;
    let params = job.params();
    let out = segment(&volume, &seeds, &params)?;

    if let Some(p) = &job.mask {
        out.mask.save(p)?;
    }
    if let Some(p) = &job.mesh {
        write(p, out.mesh.to_obj())?;
    }
    if let Some(p) = &job.contours {
        let contours = out.contours(&volume);
        write(
            p,
            serde_json::to_vec(&contours).expect("contours serialize"),
        )?;
    }
    let report = SegmentReport {
        seed_mm: seeds.primary().to_array(),
        extra_seeds_mm: seeds.extras().iter().map(|p| p.to_array()).collect(),
        params,
        stats: out.stats,
        timings: out.timings,
        wall_s: start.elapsed().as_secs_f64(),
    };
    if let Some(p) = &job.stats {
        write(
            p,
            serde_json::to_vec_pretty(&report).expect("report serializes"),
        )?;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub dsc: f64,
    pub volume_a_cm3: f64,
    pub volume_r_cm3: f64,
    pub voxels_a: usize,
    pub voxels_r: usize,
}

impl EvalReport {
    pub fn to_text(&self) -> String {
        format!(
            "DSC {:.6}\nvolume A {:.6} cm3 ({} voxels)\nvolume R {:.6} cm3 ({} voxels)\n",
            self.dsc, self.volume_a_cm3, self.voxels_a, self.volume_r_cm3, self.voxels_r
        )
    }
}

pub struct EvalArgs<'a> {
    pub a: &'a Path,
    pub r: &'a Path,
    pub semi: Option<&'a Path>,
    pub csv: Option<&'a Path>,
    pub case: Option<&'a str>,
}

/// Compares mask `a` against reference `r`. With a CSV path, appends a case
/// row where `a` is the one-click result and `semi` (defaulting to `a`) the
/// semi-automatic one.
pub fn cmd_eval(args: &EvalArgs) -> CliResult<EvalReport> {
    let a = BinaryMask::load(args.a)?;
    let r = BinaryMask::load(args.r)?;
    let report = EvalReport {
        dsc: dsc(&a, &r)?,
        volume_a_cm3: volume_cm3(&a),
        volume_r_cm3: volume_cm3(&r),
        voxels_a: a.count(),
        voxels_r: r.count(),
    };
    if let Some(csv_path) = args.csv {
        let semi = match args.semi {
            Some(p) => BinaryMask::load(p)?,
            None => a.clone(),
        };
        let case = args
            .case
            .map(str::to_string)
            .or_else(|| args.a.file_stem().map(|s| s.to_string_lossy().into_owned()))
            .unwrap_or_default();
        append_case(csv_path, &CaseStats::from_masks(case, &r, &a, &semi)?)?;
    }
    Ok(report)
}

fn append_case(path: &Path, case: &CaseStats) -> CliResult<()> {
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(io_err(path))?;
    let fresh = file.metadata().map_err(io_err(path))?.len() == 0;
    let mut w = csv::WriterBuilder::new()
        .has_headers(fresh)
        .from_writer(file);
    w.serialize(case)?;
    w.flush().map_err(io_err(path))?;
    Ok(())
}

pub fn cmd_summary(csv_path: &Path) -> CliResult<Summary> {
    let mut reader = csv::Reader::from_path(csv_path)?;
    let cases = reader
        .deserialize()
        .collect::<Result<Vec<CaseStats>, _>>()?;
    Ok(summarize(&cases)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct PhantomReport {
    pub volume: PathBuf,
    pub mask: PathBuf,
    pub dims: [usize; 3],
    pub object_voxels: usize,
}

/// Writes `<prefix>.vol` and `<prefix>.mask`, each with its JSON sidecar.
pub fn cmd_phantom(spec_path: &Path, prefix: &Path) -> CliResult<PhantomReport> {
    let text = std::fs::read_to_string(spec_path).map_err(io_err(spec_path))?;
    let spec: PhantomSpec =
        serde_json::from_str(&text).map_err(|source| CliError::MalformedJson {
            path: spec_path.to_path_buf(),
            source,
        })?;
    let (volume, mask) = generate_phantom(&spec)?;
    let with_ext = |ext: &str| {
        let mut s = prefix.as_os_str().to_owned();
        s.push(ext);
        PathBuf::from(s)
    };
    let (vol_path, mask_path) = (with_ext(".vol"), with_ext(".mask"));
    polarcut::volume::save_native(&volume, &vol_path)?;
    mask.save_native(&mask_path)?;
    Ok(PhantomReport {
        volume: vol_path,
        mask: mask_path,
        dims: volume.dims(),
        object_voxels: mask.count(),
    })
}

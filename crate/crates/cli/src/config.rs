use std::path::{Path, PathBuf};

use polarcut::{GraphParams, Vec3, Volume};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// One segmentation job. Seeds are world millimeters unless the caller asks
/// for voxel coordinates; unset graph parameters take the library defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub input: PathBuf,
    pub seed: [f64; 3],
    #[serde(default)]
    pub extra_seeds: Vec<[f64; 3]>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_r_mm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smoothness: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cube_d: Option<usize>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contours: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stats: Option<PathBuf>,
}

impl JobConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| {
            CliError::Core(polarcut::Error::Io {
                path: path.to_path_buf(),
                source,
            })
        })?;
        let mut cfg: JobConfig =
            serde_json::from_str(&text).map_err(|source| CliError::MalformedJson {
                path: path.to_path_buf(),
                source,
            })?;
        cfg.resolve_relative_to(path.parent().unwrap_or(Path::new(".")));
        Ok(cfg)
    }

    /// Makes relative paths relative to the directory holding the config.
    fn resolve_relative_to(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.input);
        for p in [
            &mut self.mask,
            &mut self.mesh,
            &mut self.contours,
            &mut self.stats,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
    }

    pub fn params(&self) -> GraphParams {
        let d = GraphParams::default();
        GraphParams {
            level: self.level.unwrap_or(d.level),
            samples: self.samples.unwrap_or(d.samples),
            delta_r_mm: self.delta_r_mm.or(d.delta_r_mm),
            smoothness: self.smoothness.unwrap_or(d.smoothness),
            cube_d: self.cube_d.unwrap_or(d.cube_d),
        }
    }

    /// Primary seed and extras in world millimeters.
    pub fn seeds_mm(&self, volume: &Volume, voxel_coords: bool) -> (Vec3, Vec<Vec3>) {
        let convert = |p: [f64; 3]| {
            if voxel_coords {
                volume.to_world(p)
            } else {
                Vec3::from(p)
            }
        };
        (
            convert(self.seed),
            self.extra_seeds.iter().map(|&p| convert(p)).collect(),
        )
    }
}

//! Dataset and prediction manifests.
//!
//! A dataset manifest is one JSON file:
//!
//! ```json
//! {"root": "...", "taxonomy": null,
//!  "images": [{"id": "...", "split": "train", "attribute": "a/x.png",
//!              "size": "...", "pattern": "...", "color": "...", "instance": "..."}]}
//! ```
//!
//! `root` is resolved against the manifest's directory and raster paths
//! against `root`. Predictions live one JSON file per image, named
//! `<image_id>.json`; semantic maps are either a PNG path relative to that
//! file or an inline [`LabelRle`].

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::raster::{read_label_png, write_label_png};
use crate::error::{Error, Result};
use crate::instance_metrics::Instance;
use crate::maskcore::{rle_decode, rle_encode, LabelMap, LabelRle, RleMask, Task};
use crate::taxonomy::{load_taxonomy, Taxonomy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

/// Ground truth for one image: four semantic rasters and the instance map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageSample {
    pub image_id: String,
    pub attribute: LabelMap,
    pub size: LabelMap,
    pub pattern: LabelMap,
    pub color: LabelMap,
    pub instance: LabelMap,
}

impl ImageSample {
    pub fn map(&self, task: Task) -> &LabelMap {
        match task {
            Task::Attribute => &self.attribute,
            Task::Size => &self.size,
            Task::Pattern => &self.pattern,
            Task::Color => &self.color,
            Task::Instance => &self.instance,
        }
    }

    pub fn maps(&self) -> [&LabelMap; 5] {
        [&self.attribute, &self.size, &self.pattern, &self.color, &self.instance]
    }

    pub fn dims(&self) -> (u32, u32) {
        self.attribute.dims()
    }
}

/// A model's output for one image.
#[derive(Debug, Clone)]
pub struct PredictionSample {
    pub image_id: String,
    pub width: u32,
    pub height: u32,
    /// Scored person masks; ids are 1-based positions.
    pub instances: Vec<Instance>,
    pub attribute: LabelMap,
    pub size: LabelMap,
    pub pattern: LabelMap,
    pub color: LabelMap,
}

impl PredictionSample {
    pub fn map(&self, task: Task) -> &LabelMap {
        match task {
            Task::Attribute => &self.attribute,
            Task::Size => &self.size,
            Task::Pattern => &self.pattern,
            Task::Color => &self.color,
            Task::Instance => panic!("predictions carry instance masks, not an instance map"),
        }
    }

    pub fn map_mut(&mut self, task: Task) -> &mut LabelMap {
        match task {
            Task::Attribute => &mut self.attribute,
            Task::Size => &mut self.size,
            Task::Pattern => &mut self.pattern,
            Task::Color => &mut self.color,
            Task::Instance => panic!("predictions carry instance masks, not an instance map"),
        }
    }

    /// No instances and all-background semantic maps.
    pub fn empty(image_id: &str, width: u32, height: u32) -> Result<Self> {
        let bg = |task| LabelMap::filled(width, height, task, 0);
        Ok(Self {
            image_id: image_id.to_owned(),
            width,
            height,
            instances: Vec::new(),
            attribute: bg(Task::Attribute)?,
            size: bg(Task::Size)?,
            pattern: bg(Task::Pattern)?,
            color: bg(Task::Color)?,
        })
    }

    /// The ground truth replayed as a perfect prediction with every score 1.0.
    pub fn from_ground_truth(sample: &ImageSample) -> Result<Self> {
        let mut instances = crate::instance_metrics::instances_from_map(&sample.instance, None)?;
        for (i, inst) in instances.iter_mut().enumerate() {
            inst.id = i as u32 + 1;
            inst.score = Some(1.0);
        }
        let (width, height) = sample.dims();
        Ok(Self {
            image_id: sample.image_id.clone(),
            width,
            height,
            instances,
            attribute: sample.attribute.clone(),
            size: sample.size.clone(),
            pattern: sample.pattern.clone(),
            color: sample.color.clone(),
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub split: Split,
    pub attribute: PathBuf,
    pub size: PathBuf,
    pub pattern: PathBuf,
    pub color: PathBuf,
    pub instance: PathBuf,
}

impl ManifestEntry {
    pub fn path(&self, task: Task) -> &Path {
        match task {
            Task::Attribute => &self.attribute,
            Task::Size => &self.size,
            Task::Pattern => &self.pattern,
            Task::Color => &self.color,
            Task::Instance => &self.instance,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub root: PathBuf,
    #[serde(default)]
    pub taxonomy: Option<PathBuf>,
    pub images: Vec<ManifestEntry>,
}

impl DatasetManifest {
    /// Reads a manifest and resolves `root` against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut manifest: DatasetManifest =
            serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        manifest.root = base.join(&manifest.root);
        if let Some(t) = &manifest.taxonomy {
            manifest.taxonomy = Some(base.join(t));
        }
        manifest.check_unique_ids()?;
        Ok(manifest)
    }

    pub fn check_unique_ids(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for e in &self.images {
            if !seen.insert(e.id.as_str()) {
                return Err(Error::InvalidConfig(format!("duplicate image id `{}`", e.id)));
            }
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    /// The taxonomy document named by the manifest, or the built-in catalog.
    pub fn load_taxonomy(&self) -> Result<Taxonomy> {
        match &self.taxonomy {
            Some(p) => load_taxonomy(&fs::read_to_string(p).map_err(|e| Error::io(p, e))?),
            None => Ok(Taxonomy::default()),
        }
    }

    pub fn raster_path(&self, entry: &ManifestEntry, task: Task) -> PathBuf {
        self.root.join(entry.path(task))
    }

    pub fn load_sample(&self, entry: &ManifestEntry) -> Result<ImageSample> {
        let read = |task| read_label_png(&self.raster_path(entry, task), task);
        Ok(ImageSample {
            image_id: entry.id.clone(),
            attribute: read(Task::Attribute)?,
            size: read(Task::Size)?,
            pattern: read(Task::Pattern)?,
            color: read(Task::Color)?,
            instance: read(Task::Instance)?,
        })
    }
}

/// Writes a sample's five rasters under `root` as `<task>/<image_id>.png`
/// and returns the matching manifest entry.
pub fn write_sample(sample: &ImageSample, split: Split, root: &Path) -> Result<ManifestEntry> {
    let rel = |task: Task| -> Result<PathBuf> {
        let dir = root.join(task.name());
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let rel = PathBuf::from(task.name()).join(format!("{}.png", sample.image_id));
        write_label_png(sample.map(task), &root.join(&rel))?;
        Ok(rel)
    };
    Ok(ManifestEntry {
        id: sample.image_id.clone(),
        split,
        attribute: rel(Task::Attribute)?,
        size: rel(Task::Size)?,
        pattern: rel(Task::Pattern)?,
        color: rel(Task::Color)?,
        instance: rel(Task::Instance)?,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RasterRef {
    Path(PathBuf),
    Inline(LabelRle),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PredictedInstance {
    pub score: f64,
    pub mask: RleMask,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SemanticRefs {
    pub attribute: RasterRef,
    pub size: RasterRef,
    pub pattern: RasterRef,
    pub color: RasterRef,
}

/// On-disk form of a [`PredictionSample`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PredictionFile {
    pub image_id: String,
    pub height: u32,
    pub width: u32,
    pub instances: Vec<PredictedInstance>,
    pub semantic: SemanticRefs,
}

impl PredictionFile {
    /// Inline form: every raster embedded as a run-length label map.
    pub fn inline(sample: &PredictionSample) -> Self {
        Self {
            image_id: sample.image_id.clone(),
            height: sample.height,
            width: sample.width,
            instances: sample
                .instances
                .iter()
                .map(|i| PredictedInstance {
                    score: i.score.unwrap_or(0.0),
                    mask: rle_encode(&i.mask),
                })
                .collect(),
            semantic: SemanticRefs {
                attribute: RasterRef::Inline(LabelRle::encode(&sample.attribute)),
                size: RasterRef::Inline(LabelRle::encode(&sample.size)),
                pattern: RasterRef::Inline(LabelRle::encode(&sample.pattern)),
                color: RasterRef::Inline(LabelRle::encode(&sample.color)),
            },
        }
    }

    /// Decodes masks and rasters; relative PNG paths resolve against `base`.
    pub fn resolve(self, base: &Path) -> Result<PredictionSample> {
        let dims = (self.width, self.height);
        let load = |r: &RasterRef, task: Task| -> Result<LabelMap> {
            let map = match r {
                RasterRef::Path(p) => read_label_png(&base.join(p), task)?,
                RasterRef::Inline(rle) => rle.decode(task)?,
            };
            if map.dims() != dims {
                return Err(Error::DimensionMismatch {
                    expected: dims,
                    found: map.dims(),
                });
            }
            map.check_range()?;
            Ok(map)
        };
        let mut instances = Vec::with_capacity(self.instances.len());
        for (i, inst) in self.instances.iter().enumerate() {
            let mask = rle_decode(&inst.mask)?;
            if mask.dims() != dims {
                return Err(Error::DimensionMismatch {
                    expected: dims,
                    found: mask.dims(),
                });
            }
            if !inst.score.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "{}: instance {} has a non-finite score",
                    self.image_id,
                    i + 1
                )));
            }
            instances.push(Instance {
                id: i as u32 + 1,
                mask,
                score: Some(inst.score),
            });
        }
        Ok(PredictionSample {
            attribute: load(&self.semantic.attribute, Task::Attribute)?,
            size: load(&self.semantic.size, Task::Size)?,
            pattern: load(&self.semantic.pattern, Task::Pattern)?,
            color: load(&self.semantic.color, Task::Color)?,
            image_id: self.image_id,
            width: self.width,
            height: self.height,
            instances,
        })
    }
}

pub fn prediction_path(dir: &Path, image_id: &str) -> PathBuf {
    dir.join(format!("{image_id}.json"))
}

pub fn write_prediction(sample: &PredictionSample, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = prediction_path(dir, &sample.image_id);
    let text = serde_json::to_string(&PredictionFile::inline(sample)).expect("prediction serializes");
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

pub fn read_prediction(path: &Path) -> Result<PredictionSample> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: PredictionFile = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
    file.resolve(path.parent().unwrap_or(Path::new(".")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ImageSample {
        let m = |task, data: Vec<u16>| LabelMap::new(3, 2, task, data).unwrap();
        ImageSample {
            image_id: "img0".into(),
            attribute: m(Task::Attribute, vec![2, 2, 0, 9, 9, 0]),
            size: m(Task::Size, vec![0, 0, 0, 2, 2, 0]),
            pattern: m(Task::Pattern, vec![1, 1, 0, 1, 1, 0]),
            color: m(Task::Color, vec![3, 3, 0, 12, 12, 0]),
            instance: m(Task::Instance, vec![1, 1, 0, 1, 1, 0]),
        }
    }

    #[test]
    fn dataset_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let s = sample();
        let entry = write_sample(&s, Split::Val, &dir.path().join("data")).unwrap();
        let manifest = DatasetManifest {
            root: "data".into(),
            taxonomy: None,
            images: vec![entry],
        };
        let path = dir.path().join("manifest.json");
        manifest.save(&path).unwrap();
        let loaded = DatasetManifest::load(&path).unwrap();
        assert_eq!(loaded.load_sample(&loaded.images[0]).unwrap(), s);
        assert_eq!(loaded.load_taxonomy().unwrap(), Taxonomy::default());
    }

    #[test]
    fn manifest_rejects_duplicate_ids() {
        let entry = ManifestEntry {
            id: "a".into(),
            split: Split::Train,
            attribute: "x".into(),
            size: "x".into(),
            pattern: "x".into(),
            color: "x".into(),
            instance: "x".into(),
        };
        let m = DatasetManifest {
            root: ".".into(),
            taxonomy: None,
            images: vec![entry.clone(), entry],
        };
        assert!(m.check_unique_ids().is_err());
    }

    #[test]
    fn prediction_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let pred = PredictionSample::from_ground_truth(&sample()).unwrap();
        let path = write_prediction(&pred, dir.path()).unwrap();
        let back = read_prediction(&path).unwrap();
        assert_eq!(back.instances.len(), 1);
        assert_eq!(back.instances[0].mask, pred.instances[0].mask);
        assert_eq!(back.instances[0].score, Some(1.0));
        assert_eq!(back.color, pred.color);
    }

    #[test]
    fn prediction_with_png_paths() {
        let dir = tempfile::tempdir().unwrap();
        let s = sample();
        for task in Task::SEMANTIC {
            write_label_png(s.map(task), &dir.path().join(format!("{task}.png"))).unwrap();
        }
        let json = serde_json::json!({
            "image_id": "img0", "height": 2, "width": 3,
            "instances": [{"score": 0.5, "mask": {"size": [2, 3], "counts": [0, 2, 1, 2, 1]}}],
            "semantic": {"attribute": "attribute.png", "size": "size.png",
                         "pattern": "pattern.png", "color": "color.png"}
        });
        let path = dir.path().join("img0.json");
        fs::write(&path, json.to_string()).unwrap();
        let p = read_prediction(&path).unwrap();
        assert_eq!(p.attribute, s.attribute);
        assert_eq!(p.instances[0].mask.area(), 4);
    }

    #[test]
    fn prediction_dimension_mismatch() {
        let pred = PredictionSample::from_ground_truth(&sample()).unwrap();
        let mut file = PredictionFile::inline(&pred);
        file.width = 4;
        file.height = 2;
        file.semantic.attribute = RasterRef::Inline(LabelRle {
            size: [2, 4],
            values: vec![0],
            counts: vec![8],
        });
        assert!(matches!(file.resolve(Path::new(".")), Err(Error::DimensionMismatch { .. })));
    }
}

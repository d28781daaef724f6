//! Synthetic scenes with known answers, prediction perturbations, and a
//! brute-force evaluator used as an oracle for the main engine.
//!
//! Persons are axis-aligned rectangles placed in disjoint vertical slots and
//! cut into horizontal stripes, one attribute class per stripe. Every random
//! choice comes from xoshiro256** seeded through SplitMix64, so a
//! `(seed, spec)` pair always yields the same bytes.

mod oracle;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::index::sample as sample_indices;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Normal};
use rand_xoshiro::Xoshiro256StarStar;
use serde::{Deserialize, Serialize};

pub use oracle::naive_eval;

use crate::dataset_tools::manifest::{write_prediction, write_sample, DatasetManifest, ImageSample, PredictionSample, Split};
use crate::dataset_tools::stats::StatsAccumulator;
use crate::error::{Error, Result};
use crate::maskcore::{BinaryMask, LabelMap, Task};
use crate::taxonomy::Taxonomy;

/// Name of the generator recorded alongside synthetic fixtures.
pub const RNG_NAME: &str = "xoshiro256** (seeded via splitmix64)";

pub(crate) fn rng(seed: u64) -> Xoshiro256StarStar {
    Xoshiro256StarStar::seed_from_u64(seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub width: u32,
    pub height: u32,
    /// Inclusive range of persons per image.
    pub persons: (u32, u32),
    /// Inclusive range of part stripes per person.
    pub parts_per_person: (u32, u32),
    /// Chance that a part is drawn from the characterizable attributes.
    pub characterizable_fraction: f64,
    pub attribute_pool: Vec<u16>,
    pub size_pool: Vec<u16>,
    pub pattern_pool: Vec<u16>,
    pub color_pool: Vec<u16>,
}

impl Default for SceneSpec {
    fn default() -> Self {
        let all = |t: Task| (1..=t.max_class()).collect();
        Self {
            width: 64,
            height: 64,
            persons: (0, 5),
            parts_per_person: (1, 6),
            characterizable_fraction: 0.7,
            attribute_pool: all(Task::Attribute),
            size_pool: all(Task::Size),
            pattern_pool: all(Task::Pattern),
            color_pool: all(Task::Color),
        }
    }
}

impl SceneSpec {
    pub fn with_size(mut self, width: u32, height: u32) -> Self {
        self.width = width;
        self.height = height;
        self
    }

    pub fn with_persons(mut self, lo: u32, hi: u32) -> Self {
        self.persons = (lo, hi);
        self
    }

    pub fn with_parts(mut self, lo: u32, hi: u32) -> Self {
        self.parts_per_person = (lo, hi);
        self
    }

    fn pool(&self, task: Task) -> &[u16] {
        match task {
            Task::Attribute => &self.attribute_pool,
            Task::Size => &self.size_pool,
            Task::Pattern => &self.pattern_pool,
            Task::Color => &self.color_pool,
            Task::Instance => &[],
        }
    }

    pub fn check(&self, taxonomy: &Taxonomy) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        let infeasible = |msg: String| Err(Error::SpecInfeasible(msg));
        if self.width < 8 || self.height < 8 {
            return bad(format!("scene {}x{} is smaller than 8x8", self.width, self.height));
        }
        let (plo, phi) = self.persons;
        let (klo, khi) = self.parts_per_person;
        if plo > phi || klo > khi {
            return bad("empty person or part range".into());
        }
        if klo == 0 {
            return bad("persons need at least one part".into());
        }
        if !(0.0..=1.0).contains(&self.characterizable_fraction) {
            return bad(format!("characterizable_fraction {} outside [0, 1]", self.characterizable_fraction));
        }
        for task in Task::SEMANTIC {
            let pool = self.pool(task);
            if pool.is_empty() && phi > 0 {
                return bad(format!("empty {task} pool"));
            }
            if let Some(c) = pool.iter().find(|&&c| c == 0 || c > task.max_class()) {
                return bad(format!("{task} pool holds class {c} outside 1..={}", task.max_class()));
            }
        }
        if phi > self.width {
            return infeasible(format!("{phi} persons do not fit side by side in {} columns", self.width));
        }
        if khi > self.height {
            return infeasible(format!("{khi} stripes do not fit in {} rows", self.height));
        }
        let mut distinct = self.attribute_pool.clone();
        distinct.sort_unstable();
        distinct.dedup();
        if (khi as usize) > distinct.len() {
            return infeasible(format!("{khi} distinct parts requested from {} attribute classes", distinct.len()));
        }
        let sparse = taxonomy.sparse_index();
        let needs_size = distinct
            .iter()
            .any(|&a| a != taxonomy.hair_index() && taxonomy.characterizable(a).unwrap_or(false));
        if needs_size && self.size_pool.iter().all(|&s| s == sparse) {
            return infeasible("only the hair-only size class is available for other parts".into());
        }
        Ok(())
    }
}

/// One stripe of one person.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Part {
    pub x0: u32,
    pub y0: u32,
    pub x1: u32,
    pub y1: u32,
    pub attribute: u16,
    /// Size, pattern and color classes; all 0 on non-characterizable parts.
    pub characteristics: [u16; 3],
}

impl Part {
    pub fn area(&self) -> u64 {
        (self.x1 - self.x0) as u64 * (self.y1 - self.y0) as u64
    }
}

/// What the generator placed, independent of any raster scan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeclaredTruth {
    pub width: u32,
    pub height: u32,
    /// Parts of person `i + 1`.
    pub persons: Vec<Vec<Part>>,
}

impl DeclaredTruth {
    pub fn pixels_per_class(&self, task: Task) -> Vec<u64> {
        let mut counts = vec![0u64; task.max_class() as usize + 1];
        let total = self.width as u64 * self.height as u64;
        let mut covered = 0;
        for part in self.persons.iter().flatten() {
            let class = match task {
                Task::Attribute => part.attribute,
                Task::Size => part.characteristics[0],
                Task::Pattern => part.characteristics[1],
                Task::Color => part.characteristics[2],
                Task::Instance => unreachable!("instance ids are not classes"),
            };
            counts[class as usize] += part.area();
            if class != 0 {
                covered += part.area();
            }
        }
        counts[0] = total - covered;
        counts
    }

    /// Statistics this image contributes to a dataset scan.
    pub fn accumulator(&self, split: Split) -> StatsAccumulator {
        let mut acc = StatsAccumulator {
            images: 1,
            ..Default::default()
        };
        acc.images_per_split.insert(split, 1);
        for task in Task::SEMANTIC {
            let pixels = self.pixels_per_class(task);
            acc.images_per_label.insert(task, pixels.iter().map(|&n| (n > 0) as u64).collect());
            acc.pixels_per_class.insert(task, pixels);
        }
        acc.instances_total = self.persons.len() as u64;
        acc.people_histogram.insert(self.persons.len() as u64, 1);
        acc
    }
}

#[derive(Debug, Clone)]
pub struct Scene {
    pub ground_truth: ImageSample,
    /// Exact copy of the ground truth with every score 1.0.
    pub prediction: PredictionSample,
    pub truth: DeclaredTruth,
}

pub fn scene_id(seed: u64) -> String {
    format!("scene{seed:06}")
}

/// Draws `k` distinct attributes, each from the characterizable subset with
/// probability `fraction` when that subset still has classes left.
fn draw_attributes(rng: &mut Xoshiro256StarStar, k: usize, spec: &SceneSpec, taxonomy: &Taxonomy) -> Vec<u16> {
    let mut pool = spec.attribute_pool.clone();
    pool.sort_unstable();
    pool.dedup();
    let (mut yes, mut no): (Vec<u16>, Vec<u16>) =
        pool.into_iter().partition(|&a| taxonomy.characterizable(a).unwrap_or(false));
    yes.shuffle(rng);
    no.shuffle(rng);
    (0..k)
        .map(|_| {
            let want = rng.gen_bool(spec.characterizable_fraction);
            match (want, yes.is_empty(), no.is_empty()) {
                (true, false, _) | (false, false, true) => yes.pop().unwrap(),
                _ => no.pop().unwrap(),
            }
        })
        .collect()
}

pub fn generate_scene(seed: u64, spec: &SceneSpec, taxonomy: &Taxonomy) -> Result<Scene> {
    spec.check(taxonomy)?;
    let mut rng = rng(seed);
    let (w, h) = (spec.width, spec.height);
    let n_persons = rng.gen_range(spec.persons.0..=spec.persons.1);
    let sparse = taxonomy.sparse_index();
    let hair = taxonomy.hair_index();
    let mut persons = Vec::with_capacity(n_persons as usize);
    if let Some(slot) = w.checked_div(n_persons) {
        for i in 0..n_persons {
            let pw = rng.gen_range(slot.div_ceil(2).max(1)..=slot);
            let x0 = i * slot + rng.gen_range(0..=slot - pw);
            let k = rng.gen_range(spec.parts_per_person.0..=spec.parts_per_person.1);
            let ph = rng.gen_range(k.max(h / 2)..=h);
            let y0 = rng.gen_range(0..=h - ph);
            let mut cuts: Vec<u32> = sample_indices(&mut rng, ph as usize - 1, k as usize - 1)
                .into_iter()
                .map(|c| c as u32 + 1)
                .collect();
            cuts.sort_unstable();
            let bounds: Vec<u32> = std::iter::once(0).chain(cuts).chain(std::iter::once(ph)).collect();
            let attributes = draw_attributes(&mut rng, k as usize, spec, taxonomy);
            let parts = bounds
                .windows(2)
                .zip(attributes)
                .map(|(b, attribute)| {
                    let characteristics = if taxonomy.characterizable(attribute).unwrap_or(false) {
                        let sizes: Vec<u16> =
                            spec.size_pool.iter().copied().filter(|&s| s != sparse || attribute == hair).collect();
                        [
                            *sizes.choose(&mut rng).unwrap(),
                            *spec.pattern_pool.choose(&mut rng).unwrap(),
                            *spec.color_pool.choose(&mut rng).unwrap(),
                        ]
                    } else {
                        [0; 3]
                    };
                    Part {
                        x0,
                        y0: y0 + b[0],
                        x1: x0 + pw,
                        y1: y0 + b[1],
                        attribute,
                        characteristics,
                    }
                })
                .collect();
            persons.push(parts);
        }
    }
    let truth = DeclaredTruth {
        width: w,
        height: h,
        persons,
    };
    let ground_truth = rasterize(&truth, &scene_id(seed))?;
    let prediction = PredictionSample::from_ground_truth(&ground_truth)?;
    Ok(Scene {
        ground_truth,
        prediction,
        truth,
    })
}

fn rasterize(truth: &DeclaredTruth, image_id: &str) -> Result<ImageSample> {
    let (w, h) = (truth.width, truth.height);
    let blank = |task| LabelMap::filled(w, h, task, 0);
    let mut sample = ImageSample {
        image_id: image_id.to_owned(),
        attribute: blank(Task::Attribute)?,
        size: blank(Task::Size)?,
        pattern: blank(Task::Pattern)?,
        color: blank(Task::Color)?,
        instance: blank(Task::Instance)?,
    };
    for (i, parts) in truth.persons.iter().enumerate() {
        for p in parts {
            for y in p.y0..p.y1 {
                for x in p.x0..p.x1 {
                    sample.instance.set(x, y, i as u16 + 1);
                    sample.attribute.set(x, y, p.attribute);
                    sample.size.set(x, y, p.characteristics[0]);
                    sample.pattern.set(x, y, p.characteristics[1]);
                    sample.color.set(x, y, p.characteristics[2]);
                }
            }
        }
    }
    Ok(sample)
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PerturbationSpec {
    /// Each attribute region of each instance shrinks by this many pixels.
    pub mask_erosion: u32,
    /// Scores become `s * exp(-|n|)` with `n ~ N(0, score_noise)`.
    pub score_noise: f64,
    pub drop_instance_prob: f64,
    /// Chance that a class region inside an instance is relabelled.
    #[serde(default)]
    pub relabel_prob: BTreeMap<Task, f64>,
    pub seed: u64,
}

impl PerturbationSpec {
    pub fn check(&self) -> Result<()> {
        let prob = |name: &str, p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("{name} = {p} is not a probability")))
            }
        };
        prob("drop_instance_prob", self.drop_instance_prob)?;
        for (task, &p) in &self.relabel_prob {
            if !task.is_characteristic() && *task != Task::Attribute {
                return Err(Error::InvalidConfig(format!("cannot relabel {task}")));
            }
            prob(&format!("relabel_prob.{task}"), p)?;
        }
        if !(self.score_noise >= 0.0 && self.score_noise.is_finite()) {
            return Err(Error::InvalidConfig(format!("score_noise {} must be finite and >= 0", self.score_noise)));
        }
        Ok(())
    }

    /// A spec with every degradation drawn at random, for oracle sweeps.
    pub fn random(seed: u64) -> Self {
        let mut r = rng(seed ^ 0x5eed_5eed_5eed_5eed);
        let mut relabel_prob = BTreeMap::new();
        for task in Task::SEMANTIC {
            relabel_prob.insert(task, r.gen_range(0.0..0.5));
        }
        Self {
            mask_erosion: r.gen_range(0..=2),
            score_noise: r.gen_range(0.0..1.0),
            drop_instance_prob: r.gen_range(0.0..0.4),
            relabel_prob,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relabel {
    pub task: Task,
    /// Instance id after drops.
    pub instance: u32,
    pub from: u16,
    pub to: u16,
    pub pixels: u64,
}

/// Degradations actually applied by [`perturb`].
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PerturbationRecord {
    /// Original ids of dropped instances.
    pub dropped: Vec<u32>,
    pub relabeled: Vec<Relabel>,
    pub eroded_pixels: u64,
    /// `(instance id, new score)` for every rescored instance.
    pub rescored: Vec<(u32, f64)>,
}

/// Applies drops, relabels, erosion and score noise, in that order.
pub fn perturb(pred: &PredictionSample, spec: &PerturbationSpec) -> Result<(PredictionSample, PerturbationRecord)> {
    spec.check()?;
    let mut rng = rng(spec.seed);
    let mut out = pred.clone();
    let mut record = PerturbationRecord::default();

    if spec.drop_instance_prob > 0.0 {
        let mut kept = Vec::with_capacity(out.instances.len());
        for inst in out.instances.drain(..) {
            if rng.gen_bool(spec.drop_instance_prob) {
                record.dropped.push(inst.id);
            } else {
                kept.push(inst);
            }
        }
        for (i, inst) in kept.iter_mut().enumerate() {
            inst.id = i as u32 + 1;
        }
        out.instances = kept;
    }

    for (&task, &p) in &spec.relabel_prob {
        if p == 0.0 {
            continue;
        }
        let max = task.max_class();
        let instances = std::mem::take(&mut out.instances);
        for inst in &instances {
            let map = out.map(task);
            let mut present: Vec<u16> = inst.mask.ones().map(|i| map.data()[i]).filter(|&c| c != 0).collect();
            present.sort_unstable();
            present.dedup();
            for from in present {
                if !rng.gen_bool(p) {
                    continue;
                }
                let mut to = rng.gen_range(1..max);
                if to >= from {
                    to += 1;
                }
                let data = out.map_mut(task).data_mut();
                let mut pixels = 0;
                for i in inst.mask.ones() {
                    if data[i] == from {
                        data[i] = to;
                        pixels += 1;
                    }
                }
                record.relabeled.push(Relabel {
                    task,
                    instance: inst.id,
                    from,
                    to,
                    pixels,
                });
            }
        }
        out.instances = instances;
    }

    if spec.mask_erosion > 0 {
        let e = spec.mask_erosion as i64;
        let (w, h) = (out.width as i64, out.height as i64);
        for k in 0..out.instances.len() {
            let attrs = out.attribute.data();
            let mask = &out.instances[k].mask;
            let keep = |idx: usize| {
                let (x, y) = (idx as i64 % w, idx as i64 / w);
                let a = attrs[idx];
                (-e..=e).all(|dy| {
                    (-e..=e).all(|dx| {
                        let (nx, ny) = (x + dx, y + dy);
                        if nx < 0 || ny < 0 || nx >= w || ny >= h {
                            return false;
                        }
                        let n = (ny * w + nx) as usize;
                        mask.get_index(n) && attrs[n] == a
                    })
                })
            };
            let removed: Vec<usize> = mask.ones().filter(|&i| !keep(i)).collect();
            if removed.is_empty() {
                continue;
            }
            let kept: Vec<bool> = {
                let mut bits: Vec<bool> = (0..mask.pixel_count()).map(|i| mask.get_index(i)).collect();
                for &i in &removed {
                    bits[i] = false;
                }
                bits
            };
            out.instances[k].mask = BinaryMask::from_bools(out.width, out.height, &kept)?;
            for task in Task::SEMANTIC {
                let data = out.map_mut(task).data_mut();
                for &i in &removed {
                    data[i] = 0;
                }
            }
            record.eroded_pixels += removed.len() as u64;
        }
    }

    if spec.score_noise > 0.0 {
        let normal = Normal::new(0.0, spec.score_noise).expect("checked standard deviation");
        for inst in &mut out.instances {
            let n: f64 = normal.sample(&mut rng);
            let s = inst.score.unwrap_or(1.0) * (-n.abs()).exp();
            inst.score = Some(s);
            record.rescored.push((inst.id, s));
        }
    }

    Ok((out, record))
}

/// A dataset on disk: ground-truth rasters plus one prediction file per image.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub manifest_path: PathBuf,
    pub pred_dir: PathBuf,
    /// Declared statistics of the whole dataset.
    pub truth: StatsAccumulator,
}

/// Split assignment used for fixtures: 80% train, 10% val, 10% test.
pub fn fixture_split(index: usize) -> Split {
    match index % 10 {
        8 => Split::Val,
        9 => Split::Test,
        _ => Split::Train,
    }
}

/// Per-scene perturbation seed derived from the spec's seed.
pub fn scene_perturbation(spec: &PerturbationSpec, scene_seed: u64) -> PerturbationSpec {
    PerturbationSpec {
        seed: spec.seed ^ scene_seed.wrapping_mul(0x9e37_79b9_7f4a_7c15),
        ..spec.clone()
    }
}

/// Writes scenes for `seeds` under `dir/gt` (rasters and `manifest.json`) and
/// `dir/pred` (one JSON per image), perturbing predictions when asked.
pub fn write_fixture(
    dir: &Path,
    seeds: impl IntoIterator<Item = u64>,
    spec: &SceneSpec,
    perturbation: Option<&PerturbationSpec>,
    taxonomy: &Taxonomy,
) -> Result<Fixture> {
    let gt_dir = dir.join("gt");
    let pred_dir = dir.join("pred");
    fs::create_dir_all(&gt_dir).map_err(|e| Error::io(&gt_dir, e))?;
    let mut images = Vec::new();
    let mut truth = StatsAccumulator::default();
    for (i, seed) in seeds.into_iter().enumerate() {
        let scene = generate_scene(seed, spec, taxonomy)?;
        let split = fixture_split(i);
        images.push(write_sample(&scene.ground_truth, split, &gt_dir)?);
        truth.merge(&scene.truth.accumulator(split));
        let pred = match perturbation {
            Some(p) => perturb(&scene.prediction, &scene_perturbation(p, seed))?.0,
            None => scene.prediction,
        };
        write_prediction(&pred, &pred_dir)?;
    }
    if images.is_empty() {
        fs::create_dir_all(&pred_dir).map_err(|e| Error::io(&pred_dir, e))?;
    }
    let manifest = DatasetManifest {
        root: PathBuf::from("."),
        taxonomy: None,
        images,
    };
    let manifest_path = gt_dir.join("manifest.json");
    manifest.save(&manifest_path)?;
    Ok(Fixture {
        manifest_path,
        pred_dir,
        truth,
    })
}

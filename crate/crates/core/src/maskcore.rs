//! Raster and mask primitives.
//!
//! A [`LabelMap`] holds one task's class indices for every pixel of an image.
//! A [`BinaryMask`] is a packed row-major bitset with its area cached, and
//! [`RleMask`] is its canonical run-length form: runs alternate
//! background/foreground starting with background, a leading zero run is
//! present exactly when pixel (0, 0) is foreground, and no other run is zero.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The label space a raster belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Attribute,
    Size,
    Pattern,
    Color,
    Instance,
}

impl Task {
    pub const SEMANTIC: [Task; 4] = [Task::Attribute, Task::Size, Task::Pattern, Task::Color];
    pub const CHARACTERISTIC: [Task; 3] = [Task::Size, Task::Pattern, Task::Color];

    /// Largest class index the task admits; 0 is always background.
    pub fn max_class(self) -> u16 {
        match self {
            Task::Attribute => 19,
            Task::Size => 4,
            Task::Pattern => 4,
            Task::Color => 12,
            Task::Instance => u16::MAX,
        }
    }

    pub fn is_characteristic(self) -> bool {
        matches!(self, Task::Size | Task::Pattern | Task::Color)
    }

    pub fn name(self) -> &'static str {
        match self {
            Task::Attribute => "attribute",
            Task::Size => "size",
            Task::Pattern => "pattern",
            Task::Color => "color",
            Task::Instance => "instance",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "attribute" => Ok(Task::Attribute),
            "size" => Ok(Task::Size),
            "pattern" => Ok(Task::Pattern),
            "color" => Ok(Task::Color),
            "instance" => Ok(Task::Instance),
            other => Err(Error::InvalidConfig(format!("unknown task `{other}`"))),
        }
    }
}

fn check_dims(width: u32, height: u32) -> Result<usize> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidDimensions { width, height });
    }
    Ok(width as usize * height as usize)
}

/// Row-major grid of class indices for one task.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    width: u32,
    height: u32,
    task: Task,
    data: Vec<u16>,
}

impl LabelMap {
    /// Builds a map, rejecting values above the task's class range.
    pub fn new(width: u32, height: u32, task: Task, data: Vec<u16>) -> Result<Self> {
        let map = Self::from_raw(width, height, task, data)?;
        map.check_range()?;
        Ok(map)
    }

    /// Builds a map without the class-range check. Rasters read from disk go
    /// through here so that the validator can report out-of-range pixels.
    pub fn from_raw(width: u32, height: u32, task: Task, data: Vec<u16>) -> Result<Self> {
        let n = check_dims(width, height)?;
        if data.len() != n {
            return Err(Error::DataLength {
                expected: n,
                found: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            task,
            data,
        })
    }

    pub fn filled(width: u32, height: u32, task: Task, value: u16) -> Result<Self> {
        let n = check_dims(width, height)?;
        Self::new(width, height, task, vec![value; n])
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn data(&self) -> &[u16] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [u16] {
        &mut self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, x: u32, y: u32) -> u16 {
        self.data[y as usize * self.width as usize + x as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, value: u16) {
        self.data[y as usize * self.width as usize + x as usize] = value;
    }

    pub fn max_value(&self) -> u16 {
        self.data.iter().copied().max().unwrap_or(0)
    }

    pub fn with_task(mut self, task: Task) -> Self {
        self.task = task;
        self
    }

    pub fn check_range(&self) -> Result<()> {
        let max = self.task.max_class();
        match self.data.iter().find(|&&v| v > max) {
            Some(&v) => Err(Error::ClassOutOfRange {
                task: self.task,
                class: v as u32,
                max: max as u32,
            }),
            None => Ok(()),
        }
    }

    pub fn ensure_same_dims(&self, other: &LabelMap) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                expected: self.dims(),
                found: other.dims(),
            });
        }
        Ok(())
    }
}

/// Packed row-major membership bitset with a cached area.
///
/// `span` is the half-open range of words holding at least one set bit, so
/// intersections of far-apart masks short-circuit.
#[derive(Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: u32,
    height: u32,
    words: Vec<u64>,
    area: u64,
    span: (usize, usize),
}

impl fmt::Debug for BinaryMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BinaryMask")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("area", &self.area)
            .finish()
    }
}

impl BinaryMask {
    pub fn empty(width: u32, height: u32) -> Result<Self> {
        let n = check_dims(width, height)?;
        Ok(Self {
            width,
            height,
            words: vec![0; n.div_ceil(64)],
            area: 0,
            span: (0, 0),
        })
    }

    pub fn full(width: u32, height: u32) -> Result<Self> {
        Self::from_fn(width, height, |_, _| true)
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> bool) -> Result<Self> {
        let mut builder = MaskBuilder::new(width, height)?;
        let mut idx = 0;
        for y in 0..height {
            for x in 0..width {
                if f(x, y) {
                    builder.set(idx);
                }
                idx += 1;
            }
        }
        Ok(builder.finish())
    }

    /// Row-major flags, one per pixel.
    pub fn from_bools(width: u32, height: u32, bits: &[bool]) -> Result<Self> {
        let n = check_dims(width, height)?;
        if bits.len() != n {
            return Err(Error::DataLength {
                expected: n,
                found: bits.len(),
            });
        }
        let mut builder = MaskBuilder::new(width, height)?;
        for (i, _) in bits.iter().enumerate().filter(|(_, &b)| b) {
            builder.set(i);
        }
        Ok(builder.finish())
    }

    fn from_words(width: u32, height: u32, words: Vec<u64>) -> Self {
        let area = words.iter().map(|w| w.count_ones() as u64).sum();
        let span = match words.iter().position(|&w| w != 0) {
            Some(lo) => (lo, words.iter().rposition(|&w| w != 0).unwrap() + 1),
            None => (0, 0),
        };
        Self {
            width,
            height,
            words,
            area,
            span,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn area(&self) -> u64 {
        self.area
    }

    pub fn is_empty(&self) -> bool {
        self.area == 0
    }

    pub fn get_index(&self, idx: usize) -> bool {
        self.words[idx / 64] >> (idx % 64) & 1 == 1
    }

    pub fn get(&self, x: u32, y: u32) -> bool {
        self.get_index(y as usize * self.width as usize + x as usize)
    }

    /// Indices of set pixels in row-major order.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        let (lo, hi) = self.span;
        self.words[lo..hi]
            .iter()
            .enumerate()
            .flat_map(move |(offset, &word)| {
                let base = (lo + offset) * 64;
                let mut w = word;
                std::iter::from_fn(move || {
                    if w == 0 {
                        return None;
                    }
                    let bit = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(base + bit)
                })
            })
    }

    fn ensure_same_dims(&self, other: &BinaryMask) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                expected: self.dims(),
                found: other.dims(),
            });
        }
        Ok(())
    }

    pub fn intersection_area(&self, other: &BinaryMask) -> Result<u64> {
        self.ensure_same_dims(other)?;
        let lo = self.span.0.max(other.span.0);
        let hi = self.span.1.min(other.span.1);
        if lo >= hi {
            return Ok(0);
        }
        Ok(self.words[lo..hi]
            .iter()
            .zip(&other.words[lo..hi])
            .map(|(a, b)| (a & b).count_ones() as u64)
            .sum())
    }

    pub fn intersects(&self, other: &BinaryMask) -> Result<bool> {
        Ok(self.intersection_area(other)? > 0)
    }

    pub fn and(&self, other: &BinaryMask) -> Result<BinaryMask> {
        self.ensure_same_dims(other)?;
        let words = self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect();
        Ok(Self::from_words(self.width, self.height, words))
    }

    pub fn or(&self, other: &BinaryMask) -> Result<BinaryMask> {
        self.ensure_same_dims(other)?;
        let words = self.words.iter().zip(&other.words).map(|(a, b)| a | b).collect();
        Ok(Self::from_words(self.width, self.height, words))
    }

    pub fn and_not(&self, other: &BinaryMask) -> Result<BinaryMask> {
        self.ensure_same_dims(other)?;
        let words = self.words.iter().zip(&other.words).map(|(a, b)| a & !b).collect();
        Ok(Self::from_words(self.width, self.height, words))
    }
}

/// Incremental mask construction; the area and word span are settled in
/// [`MaskBuilder::finish`].
#[derive(Debug, Clone)]
pub struct MaskBuilder {
    width: u32,
    height: u32,
    words: Vec<u64>,
}

impl MaskBuilder {
    pub fn new(width: u32, height: u32) -> Result<Self> {
        let n = check_dims(width, height)?;
        Ok(Self {
            width,
            height,
            words: vec![0; n.div_ceil(64)],
        })
    }

    #[inline]
    pub fn set(&mut self, idx: usize) {
        self.words[idx / 64] |= 1 << (idx % 64);
    }

    /// Sets pixels `start..end` (row-major indices).
    pub fn set_range(&mut self, start: usize, end: usize) {
        let mut i = start;
        while i < end {
            let bit = i % 64;
            let take = (64 - bit).min(end - i);
            let run = if take == 64 { u64::MAX } else { ((1u64 << take) - 1) << bit };
            self.words[i / 64] |= run;
            i += take;
        }
    }

    pub fn finish(self) -> BinaryMask {
        BinaryMask::from_words(self.width, self.height, self.words)
    }
}

/// Canonical row-major run-length encoding of a [`BinaryMask`].
///
/// Serializes as `{"size":[H,W],"counts":[c0,c1,...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RleMask {
    /// `[height, width]`
    pub size: [u32; 2],
    pub counts: Vec<u64>,
}

impl RleMask {
    pub fn height(&self) -> u32 {
        self.size[0]
    }

    pub fn width(&self) -> u32 {
        self.size[1]
    }

    /// Foreground area, read off the odd runs.
    pub fn area(&self) -> u64 {
        self.counts.iter().skip(1).step_by(2).sum()
    }

    pub fn validate(&self) -> Result<()> {
        let expected = check_dims(self.width(), self.height())? as u64;
        let found: u64 = self.counts.iter().sum();
        if found != expected {
            return Err(Error::CountsMismatch { expected, found });
        }
        if let Some(index) = self
            .counts
            .iter()
            .enumerate()
            .skip(1)
            .find_map(|(i, &c)| (c == 0).then_some(i))
        {
            return Err(Error::NonCanonical { index });
        }
        Ok(())
    }
}

pub fn rle_encode(mask: &BinaryMask) -> RleMask {
    let n = mask.pixel_count();
    let mut counts = Vec::new();
    let mut current = false;
    let mut run = 0u64;
    for idx in 0..n {
        let bit = mask.get_index(idx);
        if bit != current {
            counts.push(run);
            run = 0;
            current = bit;
        }
        run += 1;
    }
    counts.push(run);
    RleMask {
        size: [mask.height(), mask.width()],
        counts,
    }
}

pub fn rle_decode(rle: &RleMask) -> Result<BinaryMask> {
    rle.validate()?;
    let mut builder = MaskBuilder::new(rle.width(), rle.height())?;
    let mut pos = 0usize;
    for (i, &count) in rle.counts.iter().enumerate() {
        let end = pos + count as usize;
        if i % 2 == 1 {
            builder.set_range(pos, end);
        }
        pos = end;
    }
    Ok(builder.finish())
}

/// Pixels of `map` equal to `class_id`.
pub fn class_mask(map: &LabelMap, class_id: u16) -> Result<BinaryMask> {
    let max = map.task().max_class();
    if class_id > max {
        return Err(Error::ClassOutOfRange {
            task: map.task(),
            class: class_id as u32,
            max: max as u32,
        });
    }
    let mut builder = MaskBuilder::new(map.width(), map.height())?;
    for (i, _) in map.data().iter().enumerate().filter(|(_, &v)| v == class_id) {
        builder.set(i);
    }
    Ok(builder.finish())
}

/// |a ∩ b| / |a ∪ b|, with two empty masks scoring 0.
pub fn mask_iou(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    let inter = a.intersection_area(b)?;
    let union = a.area() + b.area() - inter;
    if union == 0 {
        return Ok(0.0);
    }
    Ok(inter as f64 / union as f64)
}

/// Run-length form of a whole label map: row-major runs of constant value.
///
/// Serializes as `{"size":[H,W],"values":[v0,...],"counts":[c0,...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelRle {
    /// `[height, width]`
    pub size: [u32; 2],
    pub values: Vec<u16>,
    pub counts: Vec<u64>,
}

impl LabelRle {
    pub fn encode(map: &LabelMap) -> Self {
        let mut values = Vec::new();
        let mut counts: Vec<u64> = Vec::new();
        for &v in map.data() {
            match values.last() {
                Some(&last) if last == v => *counts.last_mut().unwrap() += 1,
                _ => {
                    values.push(v);
                    counts.push(1);
                }
            }
        }
        Self {
            size: [map.height(), map.width()],
            values,
            counts,
        }
    }

    pub fn decode(&self, task: Task) -> Result<LabelMap> {
        let [height, width] = self.size;
        let n = check_dims(width, height)?;
        if self.values.len() != self.counts.len() {
            return Err(Error::DataLength {
                expected: self.counts.len(),
                found: self.values.len(),
            });
        }
        let found: u64 = self.counts.iter().sum();
        if found != n as u64 {
            return Err(Error::CountsMismatch {
                expected: n as u64,
                found,
            });
        }
        let mut data = Vec::with_capacity(n);
        for (&v, &c) in self.values.iter().zip(&self.counts) {
            data.extend(std::iter::repeat_n(v, c as usize));
        }
        LabelMap::from_raw(width, height, task, data)
    }
}

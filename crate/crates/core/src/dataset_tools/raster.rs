//! PNG raster I/O. Semantic maps are 8-bit palette PNGs whose indices are the
//! class ids; instance maps are 16-bit grayscale. Decoding never expands a
//! palette, so indices come back exactly as stored.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use crate::error::{Error, Result};
use crate::maskcore::{LabelMap, Task};

/// Deterministic display palette; index 0 is black.
fn palette() -> Vec<u8> {
    let mut rgb = Vec::with_capacity(256 * 3);
    for i in 0u32..256 {
        if i == 0 {
            rgb.extend_from_slice(&[0, 0, 0]);
            continue;
        }
        // golden-ratio hue walk keeps neighbouring classes distinguishable
        let h = (i as f64 * 0.618_033_988_749_895).fract() * 6.0;
        let x = 1.0 - ((h % 2.0) - 1.0).abs();
        let (r, g, b) = match h as u32 {
            0 => (1.0, x, 0.0),
            1 => (x, 1.0, 0.0),
            2 => (0.0, 1.0, x),
            3 => (0.0, x, 1.0),
            4 => (x, 0.0, 1.0),
            _ => (1.0, 0.0, x),
        };
        let v = 0.55 + 0.45 * ((i % 3) as f64 / 2.0);
        rgb.extend([r, g, b].map(|c| (c * v * 255.0).round() as u8));
    }
    rgb
}

pub fn read_label_png(path: &Path, task: Task) -> Result<LabelMap> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut decoder = png::Decoder::new(BufReader::new(file));
    decoder.set_transformations(png::Transformations::IDENTITY);
    let decode_err = |source| Error::PngDecode {
        path: path.to_owned(),
        source,
    };
    let mut reader = decoder.read_info().map_err(decode_err)?;
    let mut buf = vec![0; reader.output_buffer_size()];
    let info = reader.next_frame(&mut buf).map_err(decode_err)?;
    let (width, height) = (info.width, info.height);
    let format_err = |detail: String| Error::RasterFormat {
        path: path.to_owned(),
        detail,
    };
    use png::{BitDepth, ColorType};
    let mut data = Vec::with_capacity(width as usize * height as usize);
    match (info.color_type, info.bit_depth) {
        (ColorType::Indexed | ColorType::Grayscale, BitDepth::Sixteen) => {
            for row in buf.chunks(info.line_size).take(height as usize) {
                data.extend(
                    row[..2 * width as usize]
                        .chunks_exact(2)
                        .map(|b| u16::from_be_bytes([b[0], b[1]])),
                );
            }
        }
        (ColorType::Indexed | ColorType::Grayscale, depth) => {
            let bits = depth as usize;
            let per_byte = 8 / bits;
            let mask = ((1u16 << bits) - 1) as u8;
            for row in buf.chunks(info.line_size).take(height as usize) {
                for x in 0..width as usize {
                    let byte = row[x / per_byte];
                    let shift = 8 - bits * (x % per_byte + 1);
                    data.push(((byte >> shift) & mask) as u16);
                }
            }
        }
        (color, depth) => {
            return Err(format_err(format!(
                "{color:?} at {depth:?}; expected palette or grayscale"
            )))
        }
    }
    LabelMap::from_raw(width, height, task, data)
}

/// Writes an 8-bit palette PNG; every value must fit in a byte.
pub fn write_indexed_png(map: &LabelMap, path: &Path) -> Result<()> {
    let bytes = map
        .data()
        .iter()
        .map(|&v| {
            u8::try_from(v).map_err(|_| Error::RasterFormat {
                path: path.to_owned(),
                detail: format!("value {v} does not fit an 8-bit palette"),
            })
        })
        .collect::<Result<Vec<u8>>>()?;
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut encoder = png::Encoder::new(BufWriter::new(file), map.width(), map.height());
    encoder.set_color(png::ColorType::Indexed);
    encoder.set_depth(png::BitDepth::Eight);
    encoder.set_palette(palette());
    write_png(encoder, &bytes, path)
}

/// Writes a 16-bit grayscale PNG.
pub fn write_gray16_png(map: &LabelMap, path: &Path) -> Result<()> {
    let bytes: Vec<u8> = map.data().iter().flat_map(|v| v.to_be_bytes()).collect();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut encoder = png::Encoder::new(BufWriter::new(file), map.width(), map.height());
    encoder.set_color(png::ColorType::Grayscale);
    encoder.set_depth(png::BitDepth::Sixteen);
    write_png(encoder, &bytes, path)
}

fn write_png<W: std::io::Write>(encoder: png::Encoder<'_, W>, bytes: &[u8], path: &Path) -> Result<()> {
    let encode_err = |source| Error::PngEncode {
        path: path.to_owned(),
        source,
    };
    let mut writer = encoder.write_header().map_err(encode_err)?;
    writer.write_image_data(bytes).map_err(encode_err)?;
    writer.finish().map_err(encode_err)
}

/// Writes a raster in the format its task uses on disk.
pub fn write_label_png(map: &LabelMap, path: &Path) -> Result<()> {
    match map.task() {
        Task::Instance => write_gray16_png(map, path),
        _ => write_indexed_png(map, path),
    }
}

//! Encode a mask to row-major RLE and back.

use hparse_eval::maskcore::{rle_decode, rle_encode, BinaryMask};

fn main() -> hparse_eval::Result<()> {
    let ring = BinaryMask::from_fn(6, 4, |x, y| (1..5).contains(&x) && (1..3).contains(&y) && !(x == 2 && y == 1))?;
    let rle = rle_encode(&ring);
    println!("size {}x{}, area {}", rle.width(), rle.height(), rle.area());
    println!("counts {:?}", rle.counts);
    println!("json {}", serde_json::to_string(&rle).unwrap());
    assert_eq!(rle_decode(&rle)?, ring);
    Ok(())
}

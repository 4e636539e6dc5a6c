//! Rewrites `assets/toy_predictor.bin` from the golden seed.
//!
//! `cargo run -p dragwarp-core --example regen_weights`

use dragwarp_core::diffusion::weights::{
    checksum, generate_bytes, GOLDEN_CHANNELS, GOLDEN_EMBED, GOLDEN_SEED,
};

fn main() -> std::io::Result<()> {
    let bytes = generate_bytes(GOLDEN_SEED, GOLDEN_CHANNELS, GOLDEN_EMBED);
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/assets/toy_predictor.bin");
    std::fs::write(path, &bytes)?;
    println!("{path}: {} bytes, sha256 {}", bytes.len(), checksum(&bytes));
    Ok(())
}

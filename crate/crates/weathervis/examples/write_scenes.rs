//! Regenerates the shipped test scenes: `cargo run --example write_scenes [dir]`.

use std::path::PathBuf;

fn main() -> std::io::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenes"));
    std::fs::create_dir_all(&dir)?;
    for scene in weathervis::scenes::all() {
        let path = dir.join(format!("{}.obj", scene.name));
        std::fs::write(&path, scene.to_obj_string())?;
        println!("{}", path.display());
    }
    Ok(())
}

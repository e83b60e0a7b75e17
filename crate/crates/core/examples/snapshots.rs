//! Round trip of a field through the `.sfld` snapshot format.

use emhd::spectral::{random_divfree_field, snapshot};

fn main() -> emhd::Result<()> {
    let dir = tempfile::tempdir()?;
    let path = dir.path().join("field.sfld");
    let u = random_divfree_field(8, 6, 2.0, 1.0);
    snapshot::save(&u, &path)?;
    let v = snapshot::load(&path)?;
    println!("{} bytes, tag {:?}, identical: {}", std::fs::metadata(&path)?.len(), v.tag(), u == v);
    Ok(())
}

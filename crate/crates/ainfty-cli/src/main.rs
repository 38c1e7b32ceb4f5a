//! Command-line interface for the `ainfty` engine.

fn main() {
    // Placeholder while the engine is under construction.
    eprintln!("ainfty: engine still assembling");
    std::process::exit(3);
}

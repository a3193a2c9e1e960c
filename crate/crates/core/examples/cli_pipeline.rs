//! Run a CLI pipeline from a config file and reproduce it from its manifest.

use std::path::Path;

use chronoflow::cli::{rerun, run, Command, Overrides, RunConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/configs/markov_embed.json");
    let out = std::env::temp_dir().join("chronoflow-example");
    let overrides = Overrides { out: Some(out.join("first")), ..Overrides::default() };
    let manifest = run(&RunConfig::load(Command::MarkovEmbed, Some(&config), &overrides)?)?;
    println!("{}", std::fs::read_to_string(out.join("first/embed.json"))?);
    for o in &manifest.outputs {
        println!("{} {} ({} bytes)", o.sha256, o.file, o.bytes);
    }
    rerun(&out.join("first/manifest.json"), Some(&out.join("second")))?;
    println!("rerun reproduced every output");
    Ok(())
}

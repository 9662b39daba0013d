//! Write a synthetic session to a directory.
//!
//!     cargo run -p vocalis-core --example synth_session -- out/P01 P01 C4 G4 [seed]

use std::path::PathBuf;

use vocalis_core::dataset::parse_spn;
use vocalis_core::synth::SyntheticSession;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.len() < 4 {
        eprintln!("usage: synth_session <dir> <participant> <low> <high> [seed]");
        std::process::exit(1);
    }
    let mut session = SyntheticSession::new(&args[1], parse_spn(&args[2])?, parse_spn(&args[3])?);
    if let Some(seed) = args.get(4) {
        session.seed = seed.parse()?;
    }
    let manifest = session.write(&PathBuf::from(&args[0]))?;
    println!("{}", manifest.display());
    Ok(())
}

//! Configuration, commands and output of the `benney` tool.

pub mod config;
pub mod error;
pub mod generate;
pub mod model;
pub mod report;
pub mod suite;
pub mod transport;

use std::path::Path;

pub use config::RunConfig;
pub use error::CliError;
pub use model::Model;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Generate,
    Verify,
    Transport,
}

/// Loads the config, runs `cmd` and writes its files into `out`.
pub fn run(cmd: Command, config: &Path, out: &Path, quiet: bool) -> Result<(), CliError> {
    let cfg = RunConfig::load(config)?;
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    report::log(out, &format!("{cmd:?} {}", config.display()));
    let result = execute(cmd, &cfg, out, quiet);
    let status = match &result {
        Ok(()) => "ok".to_string(),
        Err(e) => e.to_string(),
    };
    report::log(out, &format!("{cmd:?} finished: {status}"));
    result
}

fn execute(cmd: Command, cfg: &RunConfig, out: &Path, quiet: bool) -> Result<(), CliError> {
    let model = Model::build(cfg)?;
    match cmd {
        Command::Generate => {
            let (snap, meta) = generate::generate(cfg, &model)?;
            generate::write(out, &snap, &meta)?;
            if !quiet {
                let c = meta.signs.chosen;
                println!("wrote {} points (masked fraction {})", snap.mask.len(), meta.masked_fraction);
                println!("signs: s_h = {}, s_phi = {} ({})", c.s_h, c.s_phi, meta.signs.mode);
            }
            Ok(())
        }
        Command::Verify => {
            let rep = suite::verify(cfg, &model)?;
            report::write_json(&out.join("report.json"), &rep)?;
            if !quiet {
                print!("{}", rep.table());
            }
            match &rep.first_failure {
                None => Ok(()),
                Some(name) => Err(CliError::Verification(format!("check `{name}` failed"))),
            }
        }
        Command::Transport => {
            let rep = transport::transport(cfg, &model)?;
            report::write_json(&out.join("transport.json"), &rep)?;
            if !quiet {
                let o = rep.order.as_ref();
                println!(
                    "conservation: linf {:e}, status {:?}, order {:?}",
                    rep.conservation.linf,
                    o.map(|o| o.status),
                    o.and_then(|o| o.order)
                );
            }
            if rep.passed {
                Ok(())
            } else {
                Err(CliError::Verification("check `conservation` failed".into()))
            }
        }
    }
}

use std::process::ExitCode;

use clap::Parser;
use xdg_shockfit_cli::{parse_config, run_experiment, Flags};

fn main() -> ExitCode {
    let flags = Flags::parse();
    let cfg = match parse_config(flags) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run_experiment(&cfg) {
        Ok(outcome) => {
            let t = &outcome.trace;
            println!(
                "x_interface = {:.10} after {} pseudo-steps ({:?}), |x - x_s| = {:.3e}",
                t.final_x,
                t.steps.len(),
                t.termination,
                (t.final_x - cfg.case.shock_pos).abs()
            );
            if let Some(err) = &t.error {
                eprintln!("loop stopped: {err}");
            }
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

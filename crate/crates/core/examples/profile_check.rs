//! Prints the standing-wave profile self-test: surface tension values,
//! equipartition ODE residuals and branch continuity.

use obstacle_mcf::cli::cmd_profile_check;

fn main() {
    match cmd_profile_check() {
        Ok(report) => print!("{report}"),
        Err(e) => {
            eprintln!("{}", e.to_json());
            std::process::exit(1);
        }
    }
}

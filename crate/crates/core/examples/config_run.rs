//! Drive the command-line workflow in-process: simulate, then analyze,
//! both from one configuration file.

use clap::Parser;
use torsion_noise::cli::{exit_code, run, Cli};

const CONFIG: &str = "\
[pendulum]
omega0 = 1.0
q = 5.0
stiffness = 1.0

[sim]
dt = 0.05
n_steps = 400000
seed = 3

[analyze]
x_hi = 5.0
";

fn main() {
    let out = std::env::temp_dir().join("torsion-noise-example");
    std::fs::create_dir_all(&out).expect("create output dir");
    let config = out.join("example.toml");
    std::fs::write(&config, CONFIG).expect("write config");
    let (out, config) = (out.to_str().unwrap(), config.to_str().unwrap());

    for command in ["simulate", "analyze"] {
        let cli = Cli::parse_from(["torsion-noise", command, "--config", config, "--out", out]);
        match run(&cli, &mut std::io::stdout()) {
            Ok(code) => println!("{command}: exit {code}"),
            Err(e) => {
                eprintln!("error: {e}");
                std::process::exit(exit_code(&e));
            }
        }
    }
    println!("outputs in {out}");
}

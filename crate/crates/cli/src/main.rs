use std::process::ExitCode;

use clap::Parser;
use grushin_cli::{commands, error_json, exit_code, Cli};
use grushin_core::emit::write_artifact;
use grushin_core::{with_workers, Error};

fn fail(e: &Error) -> ExitCode {
    eprintln!("{}", error_json(e.code(), &e.to_string()));
    ExitCode::from(exit_code(e))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if !e.use_stderr() {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            eprintln!("{}", error_json("usage", &e.kind().to_string()));
            return ExitCode::from(2);
        }
    };
    let cfg = match cli.flags.resolve() {
        Ok(cfg) => cfg,
        Err(e) => return fail(&e),
    };
    let output = match with_workers(cfg.workers, || commands::run(cli.command, &cfg)).and_then(|r| r) {
        Ok(o) => o,
        Err(e) => return fail(&e),
    };
    print!("{}", output.stdout);
    for (name, contents) in &output.files {
        let path = cfg.out.join(name);
        if let Err(e) = write_artifact(&path, contents) {
            return fail(&e);
        }
        println!("{}", path.display());
    }
    ExitCode::SUCCESS
}

use std::process::ExitCode;

use clap::Parser;
use snapshot_hub_cli::{run, serve_config, Cli};
use snapshot_hub_service::HubError;

fn fail(e: &HubError) -> ExitCode {
    eprintln!("error[{}]: {e}", e.code());
    ExitCode::from(e.class().exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(config) = serve_config(&cli) {
        tracing_subscriber::fmt().with_writer(std::io::stderr).init();
        let rt = match tokio::runtime::Runtime::new() {
            Ok(rt) => rt,
            Err(e) => return fail(&e.into()),
        };
        return match rt.block_on(snapshot_hub_service::serve(config)) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => fail(&e),
        };
    }
    match run(&cli) {
        Ok(out) => {
            println!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}

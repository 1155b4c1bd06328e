use std::process::ExitCode;

fn main() -> ExitCode {
    match ir_ntc::main_with_args(std::env::args_os().collect(), std::io::stdout().lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

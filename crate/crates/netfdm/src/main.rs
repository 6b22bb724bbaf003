use std::process::ExitCode;

fn main() -> ExitCode {
    match netfdm::cli::run(std::env::args_os()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("netfdm: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

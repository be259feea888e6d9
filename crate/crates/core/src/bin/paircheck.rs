use std::process::ExitCode;

fn main() -> ExitCode {
    if let Ok(v) = std::env::var("PAIRCHECK_THREADS") {
        match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                {
                    eprintln!("paircheck: cannot set up {n} threads: {e}");
                    return ExitCode::from(paircheck::cli::EXIT_NUMERICAL as u8);
                }
            }
            _ => {
                eprintln!("paircheck: PAIRCHECK_THREADS must be a positive integer, got {v:?}");
                return ExitCode::from(paircheck::cli::EXIT_USAGE as u8);
            }
        }
    }
    ExitCode::from(paircheck::cli::run(std::env::args_os()) as u8)
}

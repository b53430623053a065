use std::process::ExitCode;

fn main() -> ExitCode {
    if let Ok(n) = std::env::var("EQUILIFT_THREADS") {
        match n.parse::<usize>() {
            Ok(n) if n > 0 => {
                rayon::ThreadPoolBuilder::new().num_threads(n).build_global().expect("global pool set once");
            }
            _ => {
                eprintln!("configuration error: EQUILIFT_THREADS must be a positive integer, got {n:?}");
                return ExitCode::from(2);
            }
        }
    }
    let code = equilift_cli::commands::main_with_args(std::env::args().collect());
    ExitCode::from(code as u8)
}

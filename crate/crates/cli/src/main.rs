use std::io;
use std::process::ExitCode;

fn main() -> ExitCode {
    if let Some(n) = std::env::var("DEKIT_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let code = dekit::run(std::env::args_os(), &dekit::std_gates, &mut io::stdout().lock(), &mut io::stderr().lock());
    ExitCode::from(code as u8)
}

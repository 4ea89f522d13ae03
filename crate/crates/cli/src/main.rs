use std::io;
use std::process::ExitCode;

fn main() -> ExitCode {
    let env = vqpu_cli::Env::from_process();
    let code = vqpu_cli::run(std::env::args_os(), &env, &mut io::stdout().lock(), &mut io::stderr().lock());
    ExitCode::from(code as u8)
}

use std::io::Write;

fn main() {
    let env_dir = std::env::var_os(bicoherent_cli::config::OUTPUT_DIR_VAR).map(Into::into);
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let code = bicoherent_cli::main_with(std::env::args_os(), env_dir, &mut out, &mut std::io::stderr());
    let _ = out.flush();
    std::process::exit(code);
}

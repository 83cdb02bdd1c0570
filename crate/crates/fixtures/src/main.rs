use std::path::PathBuf;
use std::process::ExitCode;

fn main() -> ExitCode {
    let root = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(lectern_fixtures::fixture_root);
    match lectern_fixtures::write_all(&root) {
        Ok(n) => {
            println!("wrote {n} files under {}", root.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("gen-fixtures: {e}");
            ExitCode::FAILURE
        }
    }
}

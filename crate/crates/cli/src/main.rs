use std::io;
use std::process::ExitCode;

use bos_cli::{main_with, Streams};

fn main() -> ExitCode {
    let (mut out, mut err) = (io::stdout(), io::stderr());
    ExitCode::from(main_with(std::env::args_os(), &mut Streams { out: &mut out, err: &mut err }))
}

use std::io::{self, Write};
use std::process::ExitCode;

use demseq_cli::{parse_args, run, CliError};

fn main() -> ExitCode {
    let result = parse_args(std::env::args_os().skip(1)).and_then(|cfg| {
        let stdout = io::stdout();
        let mut out = io::BufWriter::new(stdout.lock());
        run(&cfg, &mut out)?;
        out.flush()?;
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Info(text)) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            // numer already printed its MISMATCH line
            if !matches!(e, CliError::Mismatch(_)) {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

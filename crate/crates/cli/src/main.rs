mod args;
mod commands;
mod error;
mod output;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command, Format};
use error::CliError;

fn run(cli: &Cli) -> Result<Option<CliError>, CliError> {
    if let Some(jobs) = cli.global.jobs {
        if jobs == 0 {
            return Err(CliError::usage("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::usage(e.to_string()))?;
    }
    let (payload, late) = match &cli.command {
        Command::Map(a) => commands::map(a),
        Command::Validate(a) => commands::validate_cmd(a),
        Command::Verify(a) => commands::verify(a, cli.global.seed),
        Command::FixedPoints(a) => commands::fixed_points(a),
        Command::Jacobian(a) => commands::jacobian(a),
        Command::Iterate(a) => commands::iterate_cmd(a),
        Command::Flow(a) => commands::flow(a),
        Command::ErrorCurve(a) => commands::error_curve_cmd(a),
        Command::CirclePoly(a) => commands::circle_poly(a),
        Command::ConcatSurvey(a) => commands::survey(a),
        Command::Fractal(a) => commands::fractal(a),
        Command::Cost(a) => commands::cost(a),
    }?;
    output::emit(
        &payload,
        cli.global.format == Format::Csv,
        &cli.global.output,
    )?;
    Ok(late)
}

fn fail(e: &CliError) -> ExitCode {
    eprint!("{}", output::to_json_line(&e.record()));
    ExitCode::from(e.exit_code as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            return fail(&CliError::usage(e.render().to_string().trim_end()));
        }
    };
    match run(&cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(e)) | Err(e) => fail(&e),
    }
}

fn main() {
    let nmax = std::env::var(stokes_lab::cli::NMAX_ENV).ok();
    std::process::exit(stokes_lab::cli::main_with_args(std::env::args_os(), nmax));
}

fn main() {
    std::process::exit(aggdiff::cli::dispatch(std::env::args_os()));
}

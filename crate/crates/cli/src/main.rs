fn main() {
    std::process::exit(planecomb_cli::run_from_env());
}

fn main() {
    std::process::exit(clustersync_cli::run(std::env::args_os()));
}

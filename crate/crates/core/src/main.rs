fn main() {
    std::process::exit(bottleneck_lab::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(dragwarp_service::run_cli(std::env::args_os()));
}

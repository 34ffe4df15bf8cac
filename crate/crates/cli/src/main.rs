fn main() {
    std::process::exit(latent_fps_cli::run(std::env::args_os()));
}

fn main() -> std::process::ExitCode {
    slider_studio::cli::main()
}

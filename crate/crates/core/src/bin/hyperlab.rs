fn main() -> std::process::ExitCode {
    hyperlab::cli::main()
}

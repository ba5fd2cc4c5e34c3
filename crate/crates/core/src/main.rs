fn main() -> std::process::ExitCode {
    cgolab::cli::main()
}

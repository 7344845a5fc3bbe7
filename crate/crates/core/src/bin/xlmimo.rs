fn main() -> std::process::ExitCode {
    xlmimo::cli::main()
}

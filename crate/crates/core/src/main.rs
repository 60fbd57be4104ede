fn main() -> std::process::ExitCode {
    exact_transfer::cli::main()
}

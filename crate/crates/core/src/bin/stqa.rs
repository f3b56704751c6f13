fn main() -> std::process::ExitCode {
    stqa::cli::main()
}

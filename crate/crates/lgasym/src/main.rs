fn main() -> std::process::ExitCode {
    lgasym::cli::main()
}

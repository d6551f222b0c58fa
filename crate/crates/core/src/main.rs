fn main() -> std::process::ExitCode {
    pra_energy::cli::main()
}

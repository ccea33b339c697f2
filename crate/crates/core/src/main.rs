fn main() -> std::process::ExitCode {
    hurwitz_moments::cli::main()
}

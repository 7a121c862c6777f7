fn main() {
    std::process::exit(lflx::experiment::cli::main_with(std::env::args_os()));
}

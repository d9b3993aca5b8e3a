fn main() {
    std::process::exit(hdmanova_cli::main_with_args(std::env::args_os()));
}

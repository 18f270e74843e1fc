fn main() {
    std::process::exit(ifs_lab::cli_report::run(std::env::args_os()));
}

fn main() {
    tabula::cli::main()
}

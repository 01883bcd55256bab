//! Binary entry point; all logic lives in [`isi_bounds::cli`].

fn main() {
    std::process::exit(isi_bounds::cli::run());
}

fn main() {
    // lapack-sys only declares the FFI symbols; the eigensolver needs a
    // LAPACK implementation at link time. OpenBLAS ships one.
    println!("cargo:rustc-link-lib=dylib=openblas");
}

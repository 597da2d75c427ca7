//! Writes the built-in (192, 96) code in alist form to stdout.

fn main() {
    print!("{}", lct_core::ldpc::wimax::n192().to_alist());
}

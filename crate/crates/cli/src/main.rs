fn main() {
    println!("mic");
}

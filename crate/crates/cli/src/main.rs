fn main() {
    println!("foldpath");
}

use cat0::oracle::{generate_instance, random_point, InstanceKind, Rng};
fn main() {
    let k = generate_instance(InstanceKind::Curved, 24, 0).unwrap();
    let mut rng = Rng::new(1);
    let a = random_point(&k, &mut rng);
    let e = cat0::spm::build_spm(&k, &a).err();
    println!("{e:?}");
}

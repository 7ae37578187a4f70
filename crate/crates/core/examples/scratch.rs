use gef_core::series::truncation_order;

fn main() {
    for (r, ea, ep) in [
        (1.0, 1e-9, 1e-12),
        (2.0, 1e-9, 1e-12),
        (3.0, 1e-9, 1e-12),
        (4.0, 1e-9, 1e-12),
        (4.0, 1e-6, 1e-9),
        (8.0, 1e-9, 1e-12),
        (16.0, 1e-9, 1e-12),
    ] {
        println!(
            "r={r} eps_amp={ea:e} eps_prob={ep:e} -> K={}",
            truncation_order(r, ea, ep).unwrap()
        );
    }
}

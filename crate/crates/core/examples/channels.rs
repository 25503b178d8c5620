//! Sample-and-hold versus leaky channels tracking a decaying sender.

use poisson_gradflow::channel::{channel_drift, channel_jump, ChannelSpec, ChannelState};
use poisson_gradflow::jump::EventStream;

fn main() -> poisson_gradflow::Result<()> {
    let hold = ChannelSpec::sample_and_hold((0, 1), 5.0)?;
    let leaky = ChannelSpec::leaky((0, 1), 5.0, -2.0)?;
    let events = EventStream::generate(3, 0, 5.0, 0.0, 2.0)?;
    let h = 0.01;
    let sender = |t: f64| (-t).exp();

    let mut z_hold = ChannelState::new(vec![1.0]);
    let mut z_leak = ChannelState::new(vec![1.0]);
    let mut next = 0;
    println!("{:>5} {:>8} {:>8} {:>8}", "t", "sender", "hold", "leaky");
    for k in 0..200 {
        let t = k as f64 * h;
        while next < events.len() && events.times[next] <= t + h {
            let x = [sender(events.times[next])];
            z_hold = channel_jump(&x, &z_hold)?;
            z_leak = channel_jump(&x, &z_leak)?;
            next += 1;
        }
        for (z, spec) in [(&mut z_hold, &hold), (&mut z_leak, &leaky)] {
            let dz = channel_drift(spec, t, z);
            z.value[0] += h * dz[0];
        }
        if k % 20 == 0 {
            println!("{t:5.2} {:8.4} {:8.4} {:8.4}", sender(t), z_hold.value[0], z_leak.value[0]);
        }
    }
    Ok(())
}

pub const KERNEL_LEN: usize = 9;
pub const NUM_KERNELS: usize = 84;

/// A length-9 kernel: weight 2 at three positions, -1 elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Kernel {
    twos: [usize; 3],
}

impl Kernel {
    /// `twos` must be strictly increasing indices below 9.
    pub fn new(twos: [usize; 3]) -> Option<Self> {
        (twos[0] < twos[1] && twos[1] < twos[2] && twos[2] < KERNEL_LEN).then_some(Self { twos })
    }

    pub fn twos(&self) -> [usize; 3] {
        self.twos
    }

    pub fn weights(&self) -> [i32; KERNEL_LEN] {
        let mut w = [-1; KERNEL_LEN];
        for &i in &self.twos {
            w[i] = 2;
        }
        w
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelSet {
    kernels: Vec<Kernel>,
}

impl KernelSet {
    pub fn kernels(&self) -> &[Kernel] {
        &self.kernels
    }

    pub fn len(&self) -> usize {
        self.kernels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kernels.is_empty()
    }
}

/// All 84 placements of the three 2-weights, in lexicographic order of the
/// index triple.
pub fn enumerate_kernels() -> KernelSet {
    let mut kernels = Vec::with_capacity(NUM_KERNELS);
    for a in 0..KERNEL_LEN {
        for b in a + 1..KERNEL_LEN {
            for c in b + 1..KERNEL_LEN {
                kernels.push(Kernel { twos: [a, b, c] });
            }
        }
    }
    KernelSet { kernels }
}

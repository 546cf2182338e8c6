"""Opcode numbering for compiled expression programs.

Both kernel backends interpret the same flat postfix encoding: the code
array holds (opcode, argument) pairs; the argument is a constant-pool
index for OP_CONST and 0 otherwise.  The numbering here must stay in
sync with the switch in ``_core.pyx``.
"""

OP_CONST = 0
OP_X = 1
OP_NEG = 2
OP_ADD = 3
OP_SUB = 4
OP_MUL = 5
OP_DIV = 6
OP_POW = 7
OP_EXP = 8
OP_LOG = 9
OP_SIN = 10
OP_COS = 11
OP_TANH = 12
OP_ATAN = 13
OP_SQRT = 14
OP_ABS = 15

FUNCTION_OPS = {
    "exp": OP_EXP,
    "log": OP_LOG,
    "sin": OP_SIN,
    "cos": OP_COS,
    "tanh": OP_TANH,
    "arctan": OP_ATAN,
    "sqrt": OP_SQRT,
    "abs": OP_ABS,
}

# Monotone scalar function kinds shared with the nemytskii kernels.
PSI_IDENTITY = 0
PSI_TANH = 1
PSI_ARCTAN = 2

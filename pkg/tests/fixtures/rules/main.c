extern int limit;
int clamp(int v, int hi);

int pick(int mode, int x)
{
    int out = 0;
    switch (mode) {
    case 0:
        out = clamp(x, limit);
        break;
    case 1:
        out = x * 2;
        break;
    default:
        out = -1;
    }
    if (out < 0) {
        out = 0;
    } else {
        out = out + 1;
    }
    while (out > limit) {
        out = out - 1;
    }
    return out;
}

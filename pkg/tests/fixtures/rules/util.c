int limit = 8;

int clamp(int v, int hi)
{
    if (v > hi) {
        return hi;
    }
    return v;
}

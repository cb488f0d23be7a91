void CWE369_badSink(float *dataPtr);

void CWE369_bad()
{
    float data = 0.0F;
    data = 0.0F;
    CWE369_badSink(&data);
}

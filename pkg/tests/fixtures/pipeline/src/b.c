#include <stdio.h>

void CWE369_badSink(float *dataPtr)
{
    float data = *dataPtr;
    int result = (int)(100.0/data);
    printIntLine(result);
}
